#!/usr/bin/env python3
"""Writes crates/core/fixtures/*.json: fixed state pairs plus reference values
computed with numpy/scipy, independently of the Rust code.

Run from the repository root: python3 tools/gen_fixtures.py
"""

import json
import pathlib

import numpy as np
from scipy import integrate, linalg

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def bloch(x, y, z):
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def herm(m):
    return 0.5 * (m + m.conj().T)


def logm_psd(m):
    w, v = np.linalg.eigh(herm(m))
    return v @ np.diag(np.log(w)) @ v.conj().T


def umegaki(rho, sigma):
    return float(np.trace(rho @ (logm_psd(rho) - logm_psd(sigma))).real)


def rld_entropy(rho, sigma):
    s = linalg.sqrtm(rho)
    inner = herm(s @ np.linalg.inv(sigma) @ s)
    return float(np.trace(rho @ linalg.logm(inner)).real)


def dmax(rho, sigma):
    t = np.linalg.inv(linalg.sqrtm(sigma))
    return float(np.log(np.linalg.eigvalsh(herm(t @ rho @ t)).max()))


def fidelity_logdiv(rho, sigma):
    sv = np.linalg.svd(linalg.sqrtm(rho) @ linalg.sqrtm(sigma), compute_uv=False)
    return float(np.log(sv.sum()))


def sld_metric(rho, x):
    # rho L + L rho = 2 X
    l = linalg.solve_sylvester(rho, rho, 2 * x)
    return float(np.trace(x @ l).real)


def rld_metric(rho, x):
    return float(np.trace(np.linalg.inv(rho) @ x @ x).real)


def wy_metric(rho, x):
    s = linalg.sqrtm(rho)
    y = linalg.solve_sylvester(s, s, x)
    return float(4 * np.trace(y @ y).real)


def bkm_metric(rho, x):
    d = rho.shape[0]

    def integrand(t):
        r = np.linalg.inv(rho + t * np.eye(d))
        return np.trace(x @ r @ x @ r).real

    # substitute t = u / (1 - u) to map [0, inf) onto [0, 1)
    val, _ = integrate.quad(lambda u: integrand(u / (1 - u)) / (1 - u) ** 2, 0, 1,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(val)


def sld_integral(rho, sigma):
    x = rho - sigma
    val, _ = integrate.quad(lambda s: (1 - s) * sld_metric(s * rho + (1 - s) * sigma, x),
                            0, 1, epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(val)


def state_json(m):
    return {"dim": m.shape[0],
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m]}


def record(name, rho, sigma, tangent, source=None):
    for m in (rho, sigma):
        w = np.linalg.eigvalsh(m)
        assert w.min() > 1e-3, (name, w)
        assert abs(np.trace(m) - 1) < 1e-14
    assert np.linalg.norm(rho @ sigma - sigma @ rho) > 1e-2, name
    assert abs(np.trace(tangent)) < 1e-15
    ref = {
        "umegaki": umegaki(rho, sigma),
        "rld_entropy": rld_entropy(rho, sigma),
        "dmax": dmax(rho, sigma),
        "fidelity_logdiv": fidelity_logdiv(rho, sigma),
        "sld_integral": sld_integral(rho, sigma),
        "metric_sld": sld_metric(rho, tangent),
        "metric_wy": wy_metric(rho, tangent),
        "metric_bkm": bkm_metric(rho, tangent),
        "metric_rld": rld_metric(rho, tangent),
    }
    out = {
        "name": name,
        "rho": state_json(rho),
        "sigma": state_json(sigma),
        "tangent": state_json(tangent),
        "reference": ref,
    }
    if source is not None:
        rho0, sigma0 = source
        out["source"] = {"rho": state_json(rho0), "sigma": state_json(sigma0),
                         "umegaki": umegaki(rho0, sigma0)}
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(name, json.dumps(ref))


def qutrit_state(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    m = np.round(g @ g.conj().T / np.trace(g @ g.conj().T).real, 3)
    m = herm(m)
    m[2, 2] = 1 - m[0, 0] - m[1, 1]
    return m


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    tq = np.array([[0.1, 0.05 - 0.02j], [0.05 + 0.02j, -0.1]])
    record("qubit_a", bloch(0.4, 0.0, 0.5), bloch(0.0, 0.3, -0.3), tq,
           (bloch(0.52, -0.01, 0.09), bloch(-0.51, -0.31, 0.5)))
    record("qubit_b", bloch(0.5, 0.2, 0.3), bloch(-0.1, 0.3, -0.5), tq,
           (bloch(0.22, -0.61, -0.43), bloch(-0.78, -0.14, 0.2)))
    t3 = np.array([[0.1, 0.02j, 0.03], [-0.02j, -0.04, 0.01 - 0.01j], [0.03, 0.01 + 0.01j, -0.06]])
    record("qutrit", qutrit_state(7), qutrit_state(8), t3)


if __name__ == "__main__":
    main()
