"""Command-line experiment runner.

Exit codes: 0 success, 2 configuration error, 3 numeric or certification error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import FourierSeries, cohomological_residual, norm_s, solve_cohomological
from .arithmetic.alpha import DecimalString, Quotients, Rational, parse_alpha
from .arithmetic.classify import classify, classify_vector
from .arithmetic.contfrac import GrowthSpec, cf_expand, construct_alpha
from .arithmetic.psi import FrequencyVector, br_integral_partial, psi_table, s0_estimate
from .circle import CircleMapLift, conjugacy_probe
from .config import ExperimentConfig, load_config
from .errors import BrlabError, ConfigError, DomainExit, PrecisionExhausted
from .formats import (
    AMPLIFICATION_HEADER,
    CIRCLE_ORBIT_HEADER,
    PSI_HEADER,
    SERIES_HEADER,
    TWIST_ORBIT_HEADER,
    fourier_header,
    write_csv,
    write_json,
)
from .hamiltonflow import (
    IntegrableHamiltonian,
    PerturbedHamiltonian,
    ReparametrizedFlow,
    integrate_reparametrized,
    harmonic_factor,
    integrate,
    rotation_vector,
    weyl_proxy,
)
from .svg import LinePlot, phase_portrait, split_wraps, torus_projection
from .twist import (
    GeneratingFunction,
    IntegrableGenerating,
    TwistState,
    build_explicit_map,
    jacobian_det,
    orbit_rotation,
    twist_check,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class Run:
    """Resolved config plus output selection for one subcommand."""

    def __init__(self, cfg: ExperimentConfig, out: Path, formats: tuple[str, ...]):
        self.cfg = cfg
        self.out = out
        self.formats = formats
        self.written: list[Path] = []

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats

    def csv(self, name: str, header, rows) -> None:
        if self.wants("csv"):
            self.written.append(write_csv(self.out / name, header, rows))

    def json(self, name: str, obj) -> None:
        if self.wants("json"):
            self.written.append(write_json(self.out / name, obj))

    def svg(self, name: str, plot: LinePlot) -> None:
        if self.wants("svg"):
            self.written.append(plot.save(self.out / name))


# config resolution


def resolve_alpha(cfg: ExperimentConfig):
    """``(alpha, table)``; ``table`` is the constructed convergent table for
    ``alpha = growth`` and ``None`` otherwise."""
    f = cfg.frequency
    if f["alpha"] == "growth":
        spec = GrowthSpec(f["growth"], f["c"])
        table, rat = construct_alpha(spec, cfg.run["depth"], f["digit_budget"])
        return rat, table
    return parse_alpha(f["alpha"], f["precision"]), None


def _component(token: str, alpha):
    if token == "alpha":
        x = alpha
    else:
        try:
            return int(token)
        except ValueError:
            x = parse_alpha(token)
    if isinstance(x, (DecimalString, Quotients)):
        return x.exact_value()
    return x


def resolve_omega(cfg: ExperimentConfig) -> FrequencyVector:
    tokens = cfg.frequency["omega"]
    alpha = resolve_alpha(cfg)[0] if "alpha" in tokens else None
    return FrequencyVector(tuple(_component(t, alpha) for t in tokens), cfg.frequency["norm"])


def resolve_series(cfg: ExperimentConfig, n: int) -> FourierSeries:
    p = cfg.perturbation
    mode = tuple(p["mode"])
    if len(mode) == 1 and n > 1:
        mode = mode + (0,) * (n - 1)
    if len(mode) != n:
        raise ConfigError(f"perturbation.mode needs {n} components, got {len(mode)}")
    K = max(1, max(abs(m) for m in mode))
    if p["preset"] == "zero" or p["amplitude"] == 0:
        return FourierSeries.zeros(n, K)
    make = FourierSeries.cosine if p["preset"] == "cos" else FourierSeries.sine
    return make(p["amplitude"], mode, K)


def _budget(cfg: ExperimentConfig, norm: float) -> float:
    eps = cfg.perturbation["eps"]
    return norm if eps is None else eps


def _table_for(alpha, depth: int):
    try:
        return cf_expand(alpha, depth)
    except PrecisionExhausted:
        return None


# subcommands


def cmd_classify(run: Run) -> dict:
    cfg = run.cfg
    alpha, table = resolve_alpha(cfg)
    horizon = cfg.run["horizon"]
    if table is not None:
        label = f"growth {cfg.frequency['growth']} c={cfg.frequency['c']}"
        report = classify(table, horizon)
        report.input = label
    else:
        report = classify(alpha, horizon)
        table = cf_expand(alpha, horizon)
    run.json("classify.json", report.to_dict())
    run.csv("series.csv", SERIES_HEADER, table.rows())
    return report.to_dict()


def cmd_psi_table(run: Run) -> dict:
    omega = resolve_omega(run.cfg)
    Q = run.cfg.run["Q"]
    table = psi_table(omega, Q)
    summary = {
        "omega": omega.describe(),
        "Q": Q,
        "s0_estimate": s0_estimate(omega, Q),
        "br_integral_partial": br_integral_partial(omega, Q) if Q >= 2 else None,
        "classification": classify_vector(omega, Q).to_dict(),
    }
    run.csv("psi_table.csv", PSI_HEADER, table.rows())
    run.json("psi.json", summary)
    return summary


def cmd_cohomology(run: Run) -> dict:
    alpha, _ = resolve_alpha(run.cfg)
    g = resolve_series(run.cfg, 1)
    K = run.cfg.run["K"]
    phi, table = solve_cohomological(g, alpha, K)
    summary = {
        "alpha": float(alpha),
        "K": K,
        "residual": cohomological_residual(phi, g, float(alpha), seed=run.cfg.run["seed"]),
        "amplification_max": table.max(),
        "phi_norm_0": norm_s(phi, 0.0),
        "resonant": [list(k) for k in table.resonant],
    }
    run.csv("phi.csv", fourier_header(1), phi.to_rows())
    run.csv("amplification.csv", AMPLIFICATION_HEADER, [(k[0], a) for k, a in table.rows()])
    run.json("cohomology.json", summary)
    return summary


def cmd_orbit(run: Run) -> dict:
    alpha, _ = resolve_alpha(run.cfg)
    v = resolve_series(run.cfg, 1)
    cmap = CircleMapLift(alpha, v)
    N = run.cfg.run["N"]
    orb = cmap.orbit(0.0, N)
    summary = {"alpha": cmap.alpha_f, "N": N, "min_derivative": cmap.min_derivative}
    if N >= 1000:
        est = cmap.rotation_number(0.0, N)
        summary.update(rotation_number=est.rho, rotation_error=est.error)
    run.csv("orbit.csv", CIRCLE_ORBIT_HEADER, [(j, x) for j, x in enumerate(orb.tolist())])
    run.json("orbit.json", summary)
    if run.wants("svg"):
        x = np.mod(orb[:-1], 1.0)
        y = np.mod(orb[1:], 1.0)
        order = np.argsort(x, kind="stable")
        plot = LinePlot((0, 1), (0, 1), "circle map mod 1", "theta_j mod 1", "theta_j+1 mod 1")
        plot.add(split_wraps(x[order], y[order]), "graph")
        run.svg("orbit.svg", plot)
    return summary


def cmd_theorem1(run: Run) -> dict:
    cfg, r = run.cfg, run.cfg.run
    alpha, table = resolve_alpha(cfg)
    if table is None:
        table = _table_for(alpha, r["depth"])
    v = resolve_series(cfg, 1)
    s = cfg.perturbation["s"]
    eps = _budget(cfg, norm_s(v, s))
    h0 = IntegrableGenerating([0.0, float(alpha), r["curvature"] / 2])
    fmap = build_explicit_map(h0, v, eps, s)
    cmap = CircleMapLift(alpha, v)

    th = np.arange(256) / 256
    Theta, Ip = fmap.step_arrays(th, np.zeros_like(th))
    invariance = float(np.abs(Ip).max())
    restriction = float(np.abs(Theta - cmap(th)).max())

    rng = np.random.default_rng(r["seed"])
    states = [TwistState(float(a), float(b)) for a, b in zip(rng.random(r["states"]), rng.uniform(-0.5, 0.5, r["states"]))]
    det_residual = max(abs(jacobian_det(fmap.step, st) - 1.0) for st in states)
    gen = GeneratingFunction.linear_perturbation(h0, v)
    agreement = 0.0
    for st in states:
        a, b = fmap.step(st), gen.step(st)
        agreement = max(agreement, abs(a.theta - b.theta), abs(a.I - b.I))
    tw = twist_check(fmap, np.linspace(0, 1, 9)[:-1], np.linspace(-0.5, 0.5, 5))

    probe = conjugacy_probe(cmap, K=r["K"], max_iter=r["max_iter"], tol=r["tol"], rot_tol=r["rot_tol"],
                            check_rotation=r["check_rotation"])
    growth = []
    if table is not None:
        for n, q in enumerate(table.q):
            if 1 <= q <= r["K"] and (not growth or growth[-1]["q_n"] != q):
                growth.append({"n": n, "q_n": q, "amp": probe.amplification.at(q)})

    orbits = []
    exits = []
    for I0 in np.linspace(-0.3, 0.3, r["orbits"]):
        try:
            traj, _ = orbit_rotation(fmap, TwistState(0.0, float(I0)), r["N"])
        except DomainExit as exc:
            exits.append({"I0": float(I0), "step": exc.step})
            continue
        orbits.append(traj)
    zero_traj, zero_rot = orbit_rotation(fmap, TwistState(0.0, 0.0), r["N"])

    bundle = {
        "alpha": {"value": float(alpha), "input": cfg.frequency["alpha"],
                  "describe": alpha.describe() if hasattr(alpha, "describe") else str(alpha)},
        "perturbation": {"series": v.to_dict(), "s": s, "eps": eps, "norm_s": fmap.v_norm},
        "min_u_prime": fmap.min_u_prime,
        "invariance_residual": invariance,
        "restriction_residual": restriction,
        "det_residual": det_residual,
        "implicit_agreement": agreement,
        "twist": {"min": tw.fd_min, "max": tw.fd_max, "sign": tw.sign, "passes": tw.passes, "note": tw.note},
        "zero_section_rotation": zero_rot.rho,
        "probe": {k: v_ for k, v_ in probe.to_dict().items() if k != "w"},
        "amplification_along_convergents": growth,
        "domain_exits": exits,
    }
    run.json("theorem1.json", bundle)
    if run.wants("csv"):
        run.csv("orbit_zero.csv", TWIST_ORBIT_HEADER, [(j, a, b) for j, (a, b) in enumerate(zero_traj.tolist())])
        for i, traj in enumerate(orbits):
            run.csv(f"orbit_{i}.csv", TWIST_ORBIT_HEADER, [(j, a, b) for j, (a, b) in enumerate(traj.tolist())])
        run.csv("conjugacy_w.csv", fourier_header(1), probe.w.to_rows())
    run.svg("phase_portrait.svg", phase_portrait([zero_traj] + orbits, "explicit twist map phase portrait"))
    return bundle


def cmd_theorem23(run: Run) -> dict:
    cfg, r = run.cfg, run.cfg.run
    omega_v = resolve_omega(cfg)
    omega = omega_v.as_floats()
    n = len(omega)
    series = resolve_series(cfg, n)
    s = cfg.perturbation["s"]
    th0 = np.zeros(n)
    report: dict = {"omega": omega, "scenario": r["scenario"], "T": r["T"], "dt": r["dt"], "n": n}
    if r["scenario"] == "hamiltonian":
        H0 = IntegrableHamiltonian.quadratic(omega, r["curvature"] * np.eye(n))
        H0.certify()
        V = [series] * n
        eps = _budget(cfg, n * norm_s(series, s))
        H = PerturbedHamiltonian(H0, V, s, eps)
        traj = integrate(H, th0, np.zeros(n), r["T"], r["dt"], r["scheme"], r["samples"])
        if traj.exit_time is not None:
            raise DomainExit(f"trajectory left the domain at t = {traj.exit_time}", time=traj.exit_time)
        vec, est = rotation_vector(traj)
        report.update(
            scheme=traj.scheme, budget={"s": s, "eps": eps, "sum_norm_s": H.v_norm},
            sup_I=traj.sup_I, energy_drift=traj.drift, drift_bound=traj.drift_bound, drift_ok=traj.drift_ok,
            rotation_vector=vec, rotation_error=est.error,
        )
        header = traj.header()
    else:
        flow = ReparametrizedFlow(omega, series)
        traj = integrate_reparametrized(flow, th0, r["T"], r["dt"], r["samples"])
        vec, est = rotation_vector(traj)
        c = harmonic_factor(series)
        report.update(
            min_speed=flow.min_speed, rotation_vector=vec, rotation_error=est.error,
            harmonic_factor=c, measured_factor=vec / omega,
            factor_error=float(np.abs(vec - c * omega).max()),
            direction_deviation=traj.meta["direction_deviation"],
            s0_estimate=s0_estimate(omega_v, r["Q"]), s0_horizon=r["Q"],
        )
        header = traj.header()
    report["equidistribution"] = weyl_proxy(traj.theta).to_dict()
    run.json("theorem23.json", report)
    run.csv("trajectory.csv", header, traj.rows())
    if n >= 2:
        run.svg("projection.svg", torus_projection(traj.theta, f"{r['scenario']} flow, angles mod 1"))
    return report


COMMANDS = {
    "classify": (cmd_classify, "classify alpha by the Bruno and Russmann criteria"),
    "psi-table": (cmd_psi_table, "worst small divisor Psi(Q) of a frequency vector"),
    "theorem1": (cmd_theorem1, "explicit twist map: invariants, conjugacy probe, portraits"),
    "theorem23": (cmd_theorem23, "Hamiltonian or reparametrised flow from the zero section"),
    "cohomology": (cmd_cohomology, "solve the discrete cohomological equation"),
    "orbit": (cmd_orbit, "circle-map orbit and rotation number"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="sectioned key-value config file")
    common.add_argument("--out", type=Path, help="output directory (overrides output.directory)")
    common.add_argument("--format", choices=["csv", "json", "svg"], help="emit only this format")
    common.add_argument("--seed", type=int, help="seed for random sample points (overrides run.seed)")
    parser = argparse.ArgumentParser(prog="brlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {}
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            overrides["run.seed"] = str(args.seed)
        cfg = load_config(args.config, overrides)
        out = args.out or Path(cfg.output["directory"])
        formats = (args.format,) if args.format else tuple(cfg.output["formats"])
        run = Run(cfg, out, formats)
        COMMANDS[args.command][0](run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrlabError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for p in run.written:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
