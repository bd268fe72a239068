"""Smoke test for the `ars` extension module.

Build and install first:
    pip install maturin
    pip install --no-build-isolation ./crates/py
then run `python python/smoke_test.py`.
"""

import math

import ars


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    g = ars.Frame.grushin()
    for x in (0.5, 1.0, 2.0):
        close(g.curvature(x, 0.3), -2.0 / (x * x), 1e-12)
    try:
        g.metric(0.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("metric on the singular set should raise")

    line = [(t, -1.0 + 2.0 * t, 0.0) for t in [i / 400 for i in range(401)]]
    close(g.curve_length(line), 2.0, 1e-6)
    vertical = [(t, 0.0, t) for t in [i / 10 for i in range(11)]]
    assert math.isinf(g.curve_length(vertical))

    th = math.pi / 4
    run = ars.geodesic(g, -1.0, 0.0, math.cos(th), math.sin(th), 2.0, dt=1e-3)
    assert run["max_energy_drift"] < 1e-8
    assert len(run["crossings"]) >= 1

    a, t = 1.3, 0.9
    x, y = ars.grushin_geodesic_origin(a, 1.0, t)
    close(x, math.sin(a * t) / a, 1e-14)
    close(y, (2 * a * t - math.sin(2 * a * t)) / (4 * a * a), 1e-14)

    pts = ars.front(g, 1.0, n=41)
    assert pts
    for a, sign, x, y in pts:
        ex, ey = ars.grushin_geodesic_origin(a, float(sign), 1.0)
        close(x, ex, 1e-14)
        close(y, ey, 1e-14)

    lams = sorted(lam for lam, k, _ in ars.spectrum(1.0, k_max=2, m_per_mode=2, n=2000) if k != 0)
    for got, want in zip(lams, (4.0, 4.0, 8.0, 8.0, 8.0, 8.0)):
        close(got, want, 1e-3 * want)

    for c in (0.0, 0.5, 0.75, 2.0):
        report = ars.classify_self_adjoint(c)
        close(report["s_plus"] + report["s_minus"], 1.0, 1e-14)
        assert report["essentially_self_adjoint"] == (c >= 0.75)
    close(ars.singular_coefficient(1.0), 0.75, 0.0)
    assert ars.deficiency_index(2.0) == 0
    assert ars.deficiency_index(0.0) == 1
    try:
        ars.classify_self_adjoint(-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("c below -1/4 should raise")

    fr = ars.transmitted_fractions(0.5, [0.1, 0.05], t_final=0.05, n_x=80, n_y=8, dt=0.005)
    assert len(fr) == 2 and all(0.0 <= f <= 1.0 for f in fr)

    ev = ars.martinet_mode(0, 1, n=800, y_max=6.0, m=2)
    assert ev[0] < ev[1] and ev[0] > 0
    close(ars.popp_density(-0.5), 2.0, 1e-15)

    print("ars smoke test: ok")


if __name__ == "__main__":
    main()
