import math

import numpy as np
import pytest

import nefk


def test_defaults_round_trip():
    c = nefk.config()
    assert c["model"]["U"] == 1.5
    assert c["contour"]["dt"] == pytest.approx([0.1, 1 / 15, 0.05])
    c2 = nefk.config(c, {"field.E": 0.25})
    assert c2["field"]["E"] == 0.25


def test_bad_config_raises_value_error():
    with pytest.raises(ValueError):
        nefk.config(overrides={"thermal.T": -1.0})
    with pytest.raises(nefk.ConfigError):
        nefk.config(overrides=["model.nope=1"])


def test_faddeeva_matches_scipy():
    scipy_special = pytest.importorskip("scipy.special")
    for z in [0.3 + 0.2j, -1.5 + 0.01j, 4.0 + 2.0j]:
        assert abs(nefk.faddeeva(z) - scipy_special.wofz(z)) < 1e-12


def test_quadrature_weights_sum_to_one():
    eps, epsb, w = nefk.gauss_hermite_joint(10)
    assert sum(w) == pytest.approx(1.0, abs=1e-13)
    assert np.dot(w, np.square(eps)) == pytest.approx(0.5, abs=1e-12)


def test_equilibrium_symmetry_and_gap():
    omega = np.linspace(-3, 3, 121)
    s = nefk.equilibrium(2.0, 0.1, omega)
    assert np.max(np.abs(s["dos"] - s["dos"][::-1])) < 1e-10
    assert s["dos"][60] < 1e-3
    assert nefk.equilibrium(0.5, 0.1, omega)["dos"][60] > 0.4


def test_fit_beta_recovers_exponential():
    t = np.linspace(8, 20, 50)
    f = nefk.fit_beta(t, 3.0 * np.exp(-0.15 * (t - 8)), 8.0)
    assert f["family"] == "exp"
    assert f["beta0"] == pytest.approx(3.0, rel=1e-10)
    assert f["gamma"] == pytest.approx(0.15, rel=1e-10)


def test_noninteracting_bloch_current(tmp_path):
    over = {
        "model.U": 0.0,
        "contour.t_max": 4.0,
        "field.t_on": 1.0,
        "contour.n_tau": 20,
        "quadrature.order": 12,
        "bridge.t_patch": 3.0,
        "output.dir": str(tmp_path),
    }
    r = nefk.solve(overrides=over)
    j = r["current"]["values"]
    t = r["current"]["t"]
    assert np.all(np.abs(j[t <= 1.0]) < 1e-14)
    # Bloch oscillation of the sampled band: j = -e0 sin(E (t - t_on))
    eps, _, w = nefk.gauss_hermite_joint(12, 1e-12)
    eps, w = np.array(eps), np.array(w)
    e0 = np.sum(w * eps / (np.exp(eps / 0.1) + 1.0))
    expected = np.where(t > 1.0, -e0 * np.sin(0.5 * (t - 1.0)), 0.0)
    assert np.max(np.abs(j - expected)) < 1e-10
    assert np.max(np.abs(np.triu(r["g_loc"]["retarded"], 1))) < 1e-12
    assert np.max(np.abs(r["sigma"]["lesser"])) == 0.0


def test_read_csv(tmp_path):
    over = {"equilibrium.U": [0.5], "equilibrium.n_omega": 101, "output.dir": str(tmp_path)}
    files = nefk.run("equilibrium", overrides=over)
    header, cols = nefk.read_csv(files[0])
    assert "config_hash" in header
    assert len(cols["omega"]) == 101
    assert math.isfinite(cols["dos"].sum())
