"""Acceptance suite.

One test per criterion, each printing a `[criterion N] PASS ...` line with
the measured numbers; run with `pytest tests/test_acceptance.py -v -s`.
The heavy boundedness probe (six 128^2 scenarios to t = 50) executes once in
a session fixture and is also replayed for the byte-determinism criterion.
"""

import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from chemotax2d import (
    Field,
    GridSpec,
    HelmholtzProblem,
    ModelParams,
    certify_inequality,
    chemotactic_divergence,
    empirical_gn_ratio,
    gn_ensemble_max,
    laplacian,
    load_config,
    make_energy_params,
    phi,
    solve,
    verify_interpolation_inequality,
)
from chemotax2d.cli import main as cli_main
from chemotax2d.diagnostics import DIAGNOSTIC_COLUMNS, log_grid
from chemotax2d.model import phi_integrand
from chemotax2d.runner import run_scenario

# --- config templates -------------------------------------------------------

LOGISTIC_CONFIG = """\
seed = 1

[grid]
nx = 8
ny = 8
lx = 1.0
ly = 1.0

[model]
tau = 0
r = 1.0
mu = 1.0
p = 0.0

[controls]
dt = {dt}
dt_mode = "fixed"
cfl_safety = 0.4
t_end = {t_end}
pos_tol = 1e-10
clamp_negatives = false

[energy]
c_gn = 1.0

[initial_data.u0]
generator = "constant"
value = 0.1

[initial_data.w0]
generator = "constant"
value = 0.0

[output]
directory = "{outdir}"
cadence = 100
snapshot_times = []
"""

HEAT_CONFIG = """\
seed = 1

[grid]
nx = 64
ny = 64
lx = 1.0
ly = 1.0

[model]
tau = 1
r = 0.0
mu = 0.0
p = 0.0

[controls]
dt = 1e-3
dt_mode = "fixed"
cfl_safety = 0.4
t_end = 1.0
pos_tol = 1e-10
clamp_negatives = false

[energy]
c_gn = 1.0

[initial_data.u0]
generator = "cosine_modes"
modes = [[0, 0, 1.0], [1, 0, 0.1]]

[initial_data.w0]
generator = "constant"
value = 0.0

[initial_data.v0]
generator = "constant"
value = 0.0

[initial_data.z0]
generator = "constant"
value = 0.0

[output]
directory = "{outdir}"
cadence = 250
snapshot_times = [1.0]
"""

PROBE_CONFIG = """\
seed = 12345

[grid]
nx = 128
ny = 128
lx = 1.0
ly = 1.0

[model]
tau = {tau}
r = {r}
mu = {mu}
p = {p}

[controls]
dt = 5e-3
dt_mode = "adaptive"
cfl_safety = 0.4
t_end = {t_end}
pos_tol = 1e-10
clamp_negatives = false

[energy]
c_gn = 1.0

[initial_data.u0]
generator = "gaussian_bump"
center = [0.5, 0.5]
width = 0.08
amplitude = 1.0
mass = 30.0

[initial_data.w0]
generator = "gaussian_bump"
center = [0.5, 0.5]
width = 0.08
amplitude = 1.0
mass = 30.0

[output]
directory = "{outdir}"
cadence = 50
snapshot_times = []
"""

PROBE_CASES = [(tau, p) for tau in (0, 1) for p in (0.0, 0.5, 0.9)]


def read_csv_columns(path: Path) -> dict[str, np.ndarray]:
    lines = path.read_text().splitlines()
    names = lines[0].split(",")
    assert names == list(DIAGNOSTIC_COLUMNS)
    data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return {name: data[:, k] for k, name in enumerate(names)}


def run_probe_case(root: Path, tag: str, tau: int, p: float, r=1.0, mu=1.0, t_end=50.0):
    outdir = root / f"probe_{tag}"
    cfg_path = root / f"probe_{tag}.toml"
    cfg_path.write_text(
        PROBE_CONFIG.format(tau=tau, p=p, r=r, mu=mu, t_end=t_end, outdir=outdir)
    )
    return run_scenario(load_config(cfg_path))


@pytest.fixture(scope="session")
def probe_results(tmp_path_factory):
    root = tmp_path_factory.mktemp("probe")
    t0 = time.perf_counter()
    results = {}
    for tau, p in PROBE_CASES:
        results[(tau, p)] = run_probe_case(root, f"t{tau}_p{p:.1f}".replace(".", ""), tau, p)
    return results, time.perf_counter() - t0


# --- criteria ---------------------------------------------------------------


def test_criterion_01_discrete_conservation():
    t0 = time.perf_counter()
    g = GridSpec(64, 64, 1.0, 1.0)
    rng = np.random.default_rng(101)
    worst_lap = worst_div = 0.0
    for _ in range(200):
        f = Field(rng.uniform(-1.0, 2.0, g.ncells), g)
        d = Field(rng.uniform(0.0, 3.0, g.ncells), g)
        p = Field(rng.standard_normal(g.ncells), g)
        lap_sum = abs(np.sum(laplacian(f).values))
        lap_scale = np.abs(f.values).max() * g.ncells
        assert lap_sum <= 1e-12 * lap_scale
        div_sum = abs(np.sum(chemotactic_divergence(d, p).values))
        div_scale = (
            np.abs(d.values).max() * np.abs(p.values).max() / min(g.hx, g.hy) * g.ncells
        )
        assert div_sum <= 1e-12 * div_scale
        worst_lap = max(worst_lap, lap_sum / lap_scale)
        worst_div = max(worst_div, div_sum / div_scale)
    wall = time.perf_counter() - t0
    assert wall < 10.0
    print(
        f"\n[criterion 1] PASS conservation over 200 pairs: "
        f"worst lap {worst_lap:.2e}, worst div {worst_div:.2e} (tol 1e-12), {wall:.1f}s"
    )


def test_criterion_02_elliptic_oracle():
    t0 = time.perf_counter()
    lam = 2.0 * np.pi**2
    errs = {}
    for n in (32, 64, 128):
        g = GridSpec(n, n, 1.0, 1.0)
        x, y = g.cell_centers()
        exact = np.cos(np.pi * x) * np.cos(np.pi * y)
        rhs = Field.from_2d(g, (1.0 + lam) * exact)
        prob = HelmholtzProblem(1.0, 1.0, g, tol=1e-11, max_iter=50000, backend="cg")
        errs[n] = float(np.max(np.abs(solve(prob, rhs).as_2d() - exact)))
    orders = [np.log2(errs[a] / errs[b]) for a, b in ((32, 64), (64, 128))]
    for order in orders:
        assert 1.8 <= order <= 2.2

    g = GridSpec(64, 64, 1.0, 1.0)
    prob = HelmholtzProblem(1.0, 1.0, g, tol=1e-10, max_iter=50000, backend="cg")
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(50):
        rhs = Field(rng.standard_normal(g.ncells), g)
        out = solve(prob, rhs)
        res = np.linalg.norm(
            out.values - laplacian(out).values - rhs.values
        ) / np.linalg.norm(rhs.values)
        worst = max(worst, res)
        assert res <= 1e-10
    wall = time.perf_counter() - t0
    assert wall < 30.0
    print(
        f"\n[criterion 2] PASS elliptic: orders {orders[0]:.3f}, {orders[1]:.3f} in "
        f"[1.8, 2.2]; worst CG residual {worst:.2e} <= 1e-10; {wall:.1f}s"
    )


def logistic_exact(t: float) -> float:
    return 0.1 * np.exp(t) / (1.0 + 0.1 * (np.exp(t) - 1.0))


def test_criterion_03_ode_reduction(tmp_path):
    t0 = time.perf_counter()
    errors = {}
    for dt in (1e-3, 5e-4, 2.5e-4):
        outdir = tmp_path / f"logistic_{dt:.0e}"
        cfg = tmp_path / f"logistic_{dt:.0e}.toml"
        cfg.write_text(LOGISTIC_CONFIG.format(dt=dt, t_end=2.0, outdir=outdir))
        result = run_scenario(load_config(cfg))
        assert result.reason == "completed"
        cols = read_csv_columns(outdir / "diagnostics.csv")
        assert cols["t"][-1] == 2.0
        errors[dt] = abs(cols["linf_u"][-1] - logistic_exact(2.0))
        # the trajectory rises monotonically, so the summary peak is the
        # final value and must match the closed form as well
        assert result.summary["peak_linf_u"] == pytest.approx(
            logistic_exact(2.0), rel=1e-3
        )
    rel = errors[1e-3] / logistic_exact(2.0)
    assert rel <= 1e-3
    orders = [
        np.log2(errors[1e-3] / errors[5e-4]),
        np.log2(errors[5e-4] / errors[2.5e-4]),
    ]
    for order in orders:
        assert 0.8 <= order <= 1.2
    wall = time.perf_counter() - t0
    assert wall < 60.0
    print(
        f"\n[criterion 3] PASS logistic: rel err {rel:.2e} <= 1e-3 at dt=1e-3; "
        f"temporal orders {orders[0]:.3f}, {orders[1]:.3f} in [0.8, 1.2]; {wall:.1f}s"
    )


def test_criterion_04_heat_decay(tmp_path):
    t0 = time.perf_counter()
    outdir = tmp_path / "heat"
    cfg = tmp_path / "heat.toml"
    cfg.write_text(HEAT_CONFIG.format(outdir=outdir))
    result = run_scenario(load_config(cfg))
    assert result.reason == "completed"
    snap = np.loadtxt(outdir / "snap_u_000.txt")
    g = GridSpec(64, 64, 1.0, 1.0)
    x, _ = g.cell_centers()
    mode = np.cos(np.pi * x / g.lx)
    amp = float(np.sum(snap * mode) / np.sum(mode * mode))
    lam = (2.0 / g.hx**2) * (1.0 - np.cos(np.pi * g.hx / g.lx))
    observed = -np.log(amp / 0.1)
    rel = abs(observed - lam) / lam
    assert rel <= 0.01
    wall = time.perf_counter() - t0
    assert wall < 60.0
    print(
        f"\n[criterion 4] PASS heat decay: observed rate {observed:.4f} vs discrete "
        f"eigenvalue {lam:.4f} (rel {rel:.2e} <= 1e-2); {wall:.1f}s"
    )


def test_criterion_05_constant_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    for _ in range(100):
        params = ModelParams(
            tau=0, r=1.0, mu=float(rng.uniform(0.05, 4.0)), p=float(rng.uniform(0.0, 0.99))
        )
        ep = make_energy_params(
            params,
            w0_mass=float(rng.uniform(0.0, 10.0)),
            area=float(rng.uniform(0.5, 4.0)),
            c_gn=float(rng.uniform(0.5, 2.0)),
        )
        assert abs(ep.a_coef**2 / (4 * ep.epsilon) + ep.epsilon - ep.a_coef) <= 1e-14
        assert abs(ep.b_coef - (ep.epsilon + 1.0 / (4 * ep.epsilon))) <= 1e-14
    params = ModelParams(tau=0, r=1.0, mu=4.0, p=0.0)
    ep = make_energy_params(params, w0_mass=1.0, area=1.0, c_gn=1.0)
    assert abs(ep.epsilon - 1.0 / (3.0 * (1.0 + np.e))) <= 1e-14
    wall = time.perf_counter() - t0
    assert wall < 1.0
    print(
        f"\n[criterion 5] PASS energy-coefficient identities over 100 tuples at 1e-14; "
        f"eps(mu=4, c_gn=1, |O|=1, m=1) = 1/(3(1+e)); {wall:.2f}s"
    )


def test_criterion_06_inequality_verifier():
    t0 = time.perf_counter()

    def quad_oracle(u: float) -> float:
        edges, scale = [0.0], 1.0
        while scale < u:
            edges.append(scale)
            scale *= 10.0
        edges.append(u)
        total = 0.0
        for a, b in zip(edges, edges[1:]):
            if b > a:
                total += quad(phi_integrand, a, b, epsabs=0.0, epsrel=1e-11, limit=200)[0]
        return total

    for u in log_grid(1e8, 81):
        assert phi(u) <= u
        if u > 0:
            assert phi(u) == pytest.approx(quad_oracle(u), rel=1e-8)
    for p in (0.0, 0.5, 0.9):
        assert verify_interpolation_inequality(p, 1.0).c_delta == 0.0
        assert verify_interpolation_inequality(p, 2.5).c_delta == 0.0
    checked = 0
    for p in (0.0, 0.5, 0.9):
        for delta in (0.1, 0.01):
            rep = verify_interpolation_inequality(p, delta)
            assert rep.holds
            assert certify_inequality(rep, factor=10)
            checked += 1
    wall = time.perf_counter() - t0
    assert wall < 30.0
    print(
        f"\n[criterion 6] PASS phi closed form vs quadrature (1e-8) and phi <= u on "
        f"[0, 1e8]; C(delta >= 1) = 0; {checked} brute-force constants re-certified "
        f"at 10x resolution; {wall:.1f}s"
    )


def test_criterion_07_boundedness_probe(probe_results):
    results, wall = probe_results
    lines = []
    for (tau, p), result in results.items():
        assert result.reason == "completed", f"tau={tau} p={p}: {result.reason}"
        cols = read_csv_columns(result.outdir / "diagnostics.csv")
        t = cols["t"]
        early = t <= 1.0
        late = t >= 1.0
        for name in ("linf_u", "energy_y"):
            peak_early = float(cols[name][early].max())
            peak_late = float(cols[name][late].max())
            assert peak_late <= 5.0 * peak_early, (
                f"tau={tau} p={p} {name}: late peak {peak_late:.3g} vs "
                f"early peak {peak_early:.3g}"
            )
        lines.append(
            f"    tau={tau} p={p}: linf_u ratio "
            f"{cols['linf_u'][late].max() / cols['linf_u'][early].max():.3f}, "
            f"energy ratio {cols['energy_y'][late].max() / cols['energy_y'][early].max():.3f}"
        )
    assert wall < 900.0
    print(f"\n[criterion 7] PASS boundedness probe, 6 runs completed in {wall:.0f}s:")
    print("\n".join(lines))


def test_criterion_08_negative_control(tmp_path, capsys):
    t0 = time.perf_counter()
    outdir = tmp_path / "negative"
    cfg = tmp_path / "negative.toml"
    cfg.write_text(
        PROBE_CONFIG.format(tau=0, p=0.0, r=0.0, mu=0.0, t_end=10.0, outdir=outdir)
    )
    code = cli_main(["run", str(cfg)])
    out = capsys.readouterr().out
    assert code == 10
    assert "blow_up_detected" in out
    import json

    summary = json.loads((outdir / "summary.json").read_text())
    assert summary["reason"] == "blow_up_detected"
    assert summary["final_t"] < 10.0
    wall = time.perf_counter() - t0
    assert wall < 600.0
    print(
        f"\n[criterion 8] PASS negative control (mu=0, r=0): exit code 10, "
        f"blow-up at t = {summary['final_t']:.4g} << 10; {wall:.1f}s"
    )


def test_criterion_09_gn_audit():
    t0 = time.perf_counter()
    g = GridSpec(64, 64, 1.0, 1.0)
    best = gn_ensemble_max(g, n_fields=500, seed=909, cutoff=4, amplitude=5.0)
    assert np.isfinite(best) and best > 0.0
    for c in (0.0, 1.0, 10.0):
        got = empirical_gn_ratio(Field.constant(g, c))
        want = c * c / ((c + np.e) ** 2 * g.area)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-300)
    wall = time.perf_counter() - t0
    assert wall < 60.0
    print(
        f"\n[criterion 9] PASS ensemble ratio over 500 rectified fields: "
        f"{best:.6f} (finite); constant-field closed form to 1e-12; {wall:.1f}s"
    )


def test_criterion_10_determinism(probe_results, tmp_path):
    t0 = time.perf_counter()
    # replay the logistic oracle scenario
    outdir_a = tmp_path / "rep_a"
    outdir_b = tmp_path / "rep_b"
    for outdir in (outdir_a, outdir_b):
        cfg = tmp_path / f"{outdir.name}.toml"
        cfg.write_text(LOGISTIC_CONFIG.format(dt=1e-3, t_end=2.0, outdir=outdir))
        assert run_scenario(load_config(cfg)).reason == "completed"
    assert (outdir_a / "diagnostics.csv").read_bytes() == (
        outdir_b / "diagnostics.csv"
    ).read_bytes()

    # replay all six boundedness-probe scenarios
    results, _ = probe_results
    for (tau, p), original in results.items():
        replay = run_probe_case(
            tmp_path, f"rep_t{tau}_p{p:.1f}".replace(".", ""), tau, p
        )
        a = (original.outdir / "diagnostics.csv").read_bytes()
        b = (replay.outdir / "diagnostics.csv").read_bytes()
        assert a == b, f"tau={tau} p={p}: diagnostics.csv differs between reruns"
    wall = time.perf_counter() - t0
    print(
        f"\n[criterion 10] PASS byte-identical diagnostics.csv for the logistic "
        f"scenario and all six probe scenarios; {wall:.0f}s"
    )
