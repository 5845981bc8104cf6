"""Smoke test for the Python bindings.

    cd crates/python && maturin develop --release && python python/smoke_test.py
"""

import math

import oncopoisson as op


def main():
    assert abs(op.moran_fixation(2.0, 10) - 512 / 1023) < 1e-12
    assert abs(op.branching_survival(0.75) - 2 / 3) < 1e-12
    assert abs(op.extinction_fixed_point(0.75) - 1 / 3) < 1e-8
    assert abs(op.poisson_pmf(2, 1.0) - math.exp(-1) / 2) < 1e-12

    c, gamma, sigma = 2e-8, 3.0, 0.01
    mu0 = op.power_law_mu0(c, gamma, sigma)
    rate = op.RateModel.power_law(mu0, gamma)
    success = op.SuccessModel("constant:sigma=0.01")
    ages = [float(a) for a in range(81)]
    approx = op.incidence_curve(rate, success, ages, approx=True)
    exact = op.incidence_curve(rate, success, ages)
    assert abs(approx[-1][1] - 1.024e-2) < 1e-15
    assert abs(exact[-1][1] - (1 - math.exp(-1.024e-2))) < 1e-12
    delayed = op.incidence_with_delay(rate, success, ages, 5.0, 5.0)
    assert delayed[10][1] == 0.0

    fit = op.fit_power_law(approx, sigma=sigma)
    assert abs(fit["gamma"] - 3) < 1e-9 and fit["n_excluded"] == 1
    assert abs(fit["mu0"] / mu0 - 1) < 1e-9

    times = op.sample_events(op.RateModel("constant:mu=1"), 10.0, seed=1)
    assert all(0 < a < b for a, b in zip(times, times[1:]))
    times2, flags = op.sample_events(op.RateModel.constant(1.0), 10.0, seed=1, success=success)
    assert times2 == times and len(flags) == len(times)

    result = op.simulate_cohort(20_000, 80.0, rate, success, seed=20240101)
    max_z, gated, passed = result.validate()
    assert passed, (max_z, gated)
    assert result.empirical[0] == 0.0 and len(result.ages) == 81
    assert abs(result.analytic()[-1] - exact[-1][1]) < 1e-12

    try:
        op.SuccessModel.moran(-1.0, 10)
    except ValueError:
        pass
    else:
        raise AssertionError("negative fitness accepted")

    print(f"ok: I(80)={result.empirical[-1]:.5f} vs {exact[-1][1]:.5f}, max|z|={max_z:.2f} over {gated} ages")


if __name__ == "__main__":
    main()
