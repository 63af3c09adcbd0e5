"""Smoke test for the qkdsec extension module.

Build and install first, e.g. `maturin build --release` followed by
`pip install target/wheels/qkdsec-*.whl`, then run this script.
"""

import json
import math

import qkdsec


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    close(qkdsec.binary_entropy(0.5), 1.0, 1e-12)

    p = qkdsec.ProbDist([0.7, 0.3])
    close(p.entropy("inf", 0.1), -math.log2(0.6), 1e-12)
    close(p.entropy("0"), 1.0, 1e-12)
    close(p.distance(qkdsec.ProbDist([0.5, 0.5])), 0.2, 1e-12)

    rho = qkdsec.DensityOperator.bell_diagonal([0.85, 0.05, 0.05, 0.05])
    assert rho.dim == 4
    close(sum(rho.eigenvalues()), 1.0, 1e-12)
    close(rho.entropy(), 0.847585, 1e-6)
    zz = qkdsec.Povm.computational(2).tensor(qkdsec.Povm.computational(2))
    close(sum(rho.measure(zz).probs), 1.0, 1e-12)
    mixed = qkdsec.DensityOperator([[0.5, 0], [0, 0.5]])
    close(mixed.trace_distance(qkdsec.DensityOperator.maximally_mixed(2)), 0.0, 1e-12)
    plus = qkdsec.DensityOperator([[0.5, -0.5j], [0.5j, 0.5]])
    close(plus.entropy(), 0.0, 1e-9)

    r = qkdsec.rate("bb84", qber=0.05, conditioned=True)
    close(r["rate"], 0.427206, 1e-6)
    t = qkdsec.threshold("bb84", conditioned=True)
    close(t["threshold"], 0.1100, 5e-4)

    h = qkdsec.ToeplitzHash.random(8, 3, 1)
    assert len(h.apply([1, 0, 1, 1, 0, 0, 1, 0])) == 3
    assert qkdsec.collision_probability(6, 2) == 0.25

    transcript, summary = qkdsec.simulate("bb84", 256, lambdas=[1, 0, 0, 0], seed=7)
    assert not transcript.aborted
    assert transcript.key_alice == transcript.key_bob
    assert summary["keys_agree"]
    again = qkdsec.Transcript.from_json(transcript.to_json())
    assert again.to_json() == transcript.to_json()

    config = json.loads(transcript.to_json())["config"]
    rerun, _ = qkdsec.simulate_config(config)
    assert rerun.to_json() == transcript.to_json()

    reports = qkdsec.verify("hashing", trials=0)
    assert all(rep["satisfied"] for rep in reports)

    try:
        qkdsec.ProbDist([0.5, 0.6])
    except qkdsec.QkdError:
        pass
    else:
        raise AssertionError("invalid distribution accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
