"""Smoke test for the timedtx extension module.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

import sys

import timedtx


def check(cond, what):
    if not cond:
        print(f"FAIL {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    kp = timedtx.KeyPair.from_seed(7)
    msg = b"schedule"
    check(timedtx.recover_address(msg, kp.sign(msg)) == kp.address, "signature recovers signer")

    ct = timedtx.encrypt(kp.public_key, b"payload", seed=3)
    check(kp.decrypt(ct) == b"payload", "ecies round trip")

    out, proof = kp.vrf(b"seed")
    check(timedtx.vrf_verify(kp.public_key, b"seed", proof) == out, "vrf verifies")

    shares = timedtx.split_small(123, 3, 5, seed=1)
    check(timedtx.restore_small(shares[1:4], 3) == 123, "shamir over F_257")
    secret = bytes(range(32))
    big = timedtx.split_secret(secret, 2, 4, seed=2)
    check(timedtx.restore_secret(big[2:], 2) == secret, "shamir over the curve order")

    names = timedtx.bundled_scenarios()
    check("opt_clean" in names, "bundled scenarios listed")
    r = timedtx.run_scenario("opt_clean")
    check((r.terminal, r.path) == ("SUCCESS", "OPT"), f"opt_clean: {r.terminal} via {r.path}")
    check(r.trace == timedtx.run_scenario("opt_clean").trace, "runs are deterministic")
    w = timedtx.run_scenario("pes_one_withholder")
    check(w.path == "PES" and len(w.convictions) == 1, f"withholder convicted: {w.convictions}")
    check(w.summary["conserved"], "ledger value conserved")

    check(timedtx.gas_for("lead", 30) == 797432, "lead gas at 30 executors")
    opt = timedtx.path_cost("opt", 30)
    check(abs(opt["total_usd"] - 9.21) < 0.2, f"OPT total ${opt['total_usd']:.2f}")
    avgs = [timedtx.pooling_report(30, f)["average_per_request"] for f in (3, 7, 19)]
    check(avgs == sorted(avgs, reverse=True), f"pooling averages {[round(a, 2) for a in avgs]}")

    check(timedtx.sybil_optimum(3, 100) == 200, "sybil optimum")
    mc = timedtx.sybil_monte_carlo(100, 100, 2, 4, 10, trials=2000)
    check(abs(mc["mean"] - mc["hypergeometric"]) < 4 * mc["std_err"], f"monte carlo mean {mc['mean']:.3f}")
    eth = 10**18
    check(timedtx.bribery_budget([1, 1], eth, 1, eth // 100, 1, 10) == 2 * eth, "bribery of fresh executors")

    try:
        timedtx.run_scenario("version = 1\n")
    except ValueError as e:
        check("version" in str(e) or "missing" in str(e), "malformed scenario raises ValueError")
    else:
        check(False, "malformed scenario raises ValueError")


if __name__ == "__main__":
    main()
