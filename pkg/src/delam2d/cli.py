"""Command line entry points.

Subcommands:

  run       single trajectory; writes ledger.csv, trajectory.json and a
            restart checkpoint
  sweep     stiffness sweep; writes sweep_report.json and CSV tables
  audit     re-reads a trajectory dump and re-verifies every invariant
  selftest  runs the built-in oracle suites and reports pass/fail counts

Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 audit or
diagnostic failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, dump_config, parse_config
from .evolution import (
    Trajectory,
    load_trajectory_payload,
    save_checkpoint,
    save_trajectory,
)
from .interface import (
    FacetCosts,
    InterfaceField,
    chain_value,
    minimize_z_dp,
    perimeter_count,
)
from .limits import run_sweep
from .materials import effective_coeffs
from .momentum import MomentumSolver, SolverError, incremental_functional
from .geometry import all_jumps, build_two_block_mesh, jump

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_AUDIT = 4

OUT_DIR_ENV = "DELAM2D_OUT"


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _out_dir(cfg: RunConfig, override: str | None) -> Path:
    out = override or os.environ.get(OUT_DIR_ENV) or str(cfg["run"]["out_dir"])
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _build_trajectory(cfg: RunConfig) -> Trajectory:
    scenario = cfg.build_scenario()
    traj = Trajectory(
        mesh=scenario.mesh,
        params=scenario.params,
        tau=scenario.tau,
        u0=scenario.u0,
        u1=scenario.u1,
        z0=scenario.z0,
        strict_init=bool(cfg["run"]["strict_init"]),
        step_order=str(cfg["run"]["step_order"]),
        store_history=not bool(cfg["run"]["streaming"]),
    )
    return traj.run(scenario.n_steps)


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args.out)
    try:
        traj = _build_trajectory(cfg)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    traj.ledger.write_csv(out / "ledger.csv")
    save_checkpoint(out / "checkpoint.json", traj.state, traj.z)
    if traj.store_history:
        meta = {
            "config": dump_config(cfg),
            "max_audit_residual": traj.max_audit_residual(),
        }
        save_trajectory(out / "trajectory.json", traj, meta)
    print(f"run '{cfg['run']['name']}': {traj.n_steps} steps to t={traj.t:.6g}")
    print(f"wrote {out / 'ledger.csv'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args.out)
    scenario = cfg.build_scenario()
    report = run_sweep(
        scenario,
        cfg.k_values,
        n_samples=int(cfg["run"]["samples"]),
        exclusion_steps=int(cfg["run"]["exclusion_steps"]),
        strict_init=bool(cfg["run"]["strict_init"]),
        step_order=str(cfg["run"]["step_order"]),
    )
    report.write_json(out / "sweep_report.json")
    if not report.ok:
        print(
            f"sweep member k={report.failed_k} failed: {report.failure}",
            file=sys.stderr,
        )
        return EXIT_SOLVER
    report.write_csv_tables(out)
    checks = report.all_checks()
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} sweep.{name}")
    print(f"wrote {out / 'sweep_report.json'}")
    return EXIT_OK if all(checks.values()) else EXIT_AUDIT


def cmd_audit(args) -> int:
    payload = load_trajectory_payload(args.trajectory)
    cfg = parse_config(payload["meta"]["config"])
    mesh = cfg.build_mesh()
    params = cfg.build_params()
    tau = float(payload["tau"])
    us = [np.asarray(u, dtype=float) for u in payload["u"]]
    zs = [InterfaceField.from_values(mesh, z) for z in payload["z"]]

    traj = Trajectory(
        mesh=mesh,
        params=params,
        tau=tau,
        u0=us[0],
        u1=np.asarray(payload["v0"], dtype=float),
        z0=zs[0],
        strict_init=False,
        step_order=str(cfg["run"]["step_order"]),
    )
    # replay the stored states through the invariant checks
    traj.us, traj.zs = us, zs
    traj.times = [n * tau for n in range(len(us))]

    failures = []
    for n in range(1, len(us)):
        if (zs[n].values > zs[n - 1].values).any():
            failures.append(f"unidirectionality violated at step {n}")
    for n in range(len(us)):
        if len(mesh.dirichlet_dofs) and np.abs(us[n][mesh.dirichlet_dofs]).max() > 0:
            failures.append(f"Dirichlet dofs nonzero at step {n}")
        cert = traj.certify_step(n)
        if not cert.ok:
            failures.append(
                f"semistability violated at step {n} ({cert.worst_violation:.3e})"
            )
        if cert.perimeter_margin < -1e-12:
            failures.append(f"perimeter bound violated at step {n}")
    solver = MomentumSolver(mesh, params)
    for n in range(1, len(us)):
        from .momentum import KinematicState

        state = KinematicState(
            u=us[n - 1],
            u_prev=us[n - 2] if n >= 2 else us[0] - tau * np.asarray(payload["v0"]),
            u_prev2=us[n - 1],
            t=(n - 1) * tau,
        )
        res = solver.step_residual(zs[n - 1], tau, state, n * tau, us[n])
        _, rhs = solver.assemble(zs[n - 1], tau, state, n * tau)
        scale = np.linalg.norm(rhs) or 1.0
        if np.linalg.norm(res) > 1e-9 * scale:
            failures.append(f"momentum residual too large at step {n}")
    recorded = float(payload["meta"].get("max_audit_residual", np.inf))
    recomputed = traj.max_audit_residual()
    if not np.isclose(recomputed, recorded, rtol=1e-9, atol=1e-12):
        failures.append(
            f"energy audit residual changed: {recomputed!r} vs recorded {recorded!r}"
        )

    if failures:
        for msg in failures:
            print(f"FAIL {msg}", file=sys.stderr)
        return EXIT_AUDIT
    print(f"audit ok: {len(us) - 1} steps, max energy residual {recomputed:.3e}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    rng = np.random.default_rng(0)
    passed = failed = 0

    def check(name: str, ok: bool):
        nonlocal passed, failed
        passed += ok
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}")

    # chain minimizer vs exhaustive enumeration
    ok = True
    for _ in range(200):
        n = int(rng.integers(1, 11))
        c0 = rng.normal(size=n)
        c1 = rng.normal(size=n)
        frozen = rng.random(n) < 0.25
        b_k = float(abs(rng.normal()))
        costs = FacetCosts(c0=c0, c1=c1, frozen_zero=frozen)
        z = minimize_z_dp(costs, b_k)
        best = min(
            chain_value(_bits(m, n), costs, b_k) for m in range(2**n)
        )
        if abs(chain_value(z, costs, b_k) - best) > 1e-12:
            ok = False
            break
    check("chain minimizer equals exhaustive enumeration", ok)

    # jump operator vs nodewise subtraction
    mesh = build_two_block_mesh(1.0, 1.0, 4, 2, {"top", "bottom"}, set())
    u = rng.normal(size=mesh.n_dofs)
    ok = True
    un = mesh.as_nodal(u)
    for i, f in enumerate(mesh.interface_facets):
        expect0 = un[f.plus_nodes[0]] - un[f.minus_nodes[0]]
        if not np.allclose(jump(mesh, u, i)[0], expect0, atol=0, rtol=0):
            ok = False
    check("jump operator equals nodewise oracle", ok)

    # perimeter vs direct scan
    vals = rng.integers(0, 2, size=31)
    scan = sum(int(vals[i] != vals[i + 1]) for i in range(30))
    check("perimeter equals scan oracle", perimeter_count(vals) == scan)

    # assembled gradient vs centered differences of the functional
    from .energies import EnergyModel
    from .momentum import KinematicState
    from .scenarios import default_mesh, make_load
    from .materials import ModelParams, TimeProfile

    mesh = default_mesh(nx=6, ny=3)
    params = ModelParams(
        rho=1.0,
        lame_lambda_C=1.0,
        lame_mu_C=1.0,
        lame_lambda_D=0.1,
        lame_mu_D=0.1,
        a0=0.05,
        a1=0.05,
        b=0.01,
        k=50.0,
        load=make_load("pull_apart", 1.0, TimeProfile("ramp")),
    )
    model = EnergyModel(mesh, params)
    solver = MomentumSolver(mesh, params)
    z = InterfaceField.fully_bonded(mesh)
    tau = 0.02
    state = KinematicState.initial(
        np.zeros(mesh.n_dofs), np.zeros(mesh.n_dofs), tau
    )
    u = solver.solve_step(z, tau, state, tau)
    A, rhs = solver.assemble(z, tau, state, tau)
    grad = A.matrix @ A.restrict(u) - rhs
    ok = True
    for _ in range(20):
        v = rng.normal(size=mesh.n_dofs)
        v[mesh.dirichlet_dofs] = 0.0
        h = 1e-6 / max(np.linalg.norm(v), 1e-12)
        f_p = incremental_functional(model, z, tau, state, tau, u + h * v)
        f_m = incremental_functional(model, z, tau, state, tau, u - h * v)
        fd = (f_p - f_m) / (2 * h)
        an = float(grad @ A.restrict(v))
        if abs(fd - an) > 1e-6 * max(1.0, abs(fd)):
            ok = False
    check("assembled gradient matches finite differences", ok)

    print(f"{passed} passed, {failed} failed")
    return EXIT_OK if failed == 0 else EXIT_AUDIT


def _bits(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=np.int8)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="delam2d",
        description="Two-block visco-elastodynamic delamination simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single trajectory")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the stiffness sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_audit = sub.add_parser("audit", help="re-verify a trajectory dump")
    p_audit.add_argument("--trajectory", required=True)
    p_audit.set_defaults(func=cmd_audit)

    p_self = sub.add_parser("selftest", help="run the built-in oracle suites")
    p_self.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
