"""``stabctl``: scenario-driven front end.

Exit codes: 0 success, 2 input error, 3 infeasible or failed certificate,
4 cap exceeded.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Callable

from . import chambers, cones, kahler, quiver, sheaf, vgit
from .exact import format_scalar, parse_scalar
from .io import Scenario, ScenarioError, dump_csv, dump_json, parse_caps, scalar

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_CAP = 0, 2, 3, 4


class CertificateFailure(RuntimeError):
    """A certificate did not re-verify."""


def _fmt(xs) -> list[str]:
    return [format_scalar(x) for x in xs]


# ----------------------------------------------------------------------
# sheaf side


def cmd_walls(sc: Scenario, args) -> tuple[dict, list]:
    E, fam = sc.target_and_family()
    walls = chambers.compute_walls(E, fam, include_constant=sc.get("include_constant", True))
    rows = [w.to_json() for w in walls]
    return {"command": "walls", "target": E.label, "walls": rows}, [
        {"normal": r["normal"], "origins": r["origins"]} for r in rows
    ]


def cmd_chambers(sc: Scenario, args) -> tuple[dict, list]:
    E, fam = sc.target_and_family()
    walls = chambers.compute_walls(E, fam, include_constant=sc.get("include_constant", True))
    region = sc.get("region", "full")
    chs = chambers.enumerate_chambers(walls, region=region, j0=E.j0)
    out = []
    for c in chs:
        row = c.to_json()
        if all(x > 0 for x in c.sample):
            row["verdict"] = sheaf.verdict(E, fam, c.sample).to_json()
        out.append(row)
    report = {
        "command": "chambers",
        "target": E.label,
        "region": region,
        "walls": [w.to_json() for w in walls],
        "chambers": out,
        "count": len(out),
    }
    return report, [{"signs": r["signs"], "sample": r["sample"], "full_dim": r["full_dim"]} for r in out]


def _sigma_arg(sc: Scenario, args):
    if args.sigma:
        return tuple(scalar(x.strip(), "--sigma") for x in args.sigma.split(","))
    return sc.sigma()


def cmd_locate(sc: Scenario, args) -> tuple[dict, list]:
    E, fam = sc.target_and_family()
    walls = chambers.compute_walls(E, fam, include_constant=sc.get("include_constant", True))
    sigma = _sigma_arg(sc, args)
    signs = chambers.locate(sigma, walls)
    rep = chambers.rational_representative(signs, walls, sc.get("region", "full"), E.j0)
    report = {
        "command": "locate",
        "sigma": _fmt(sigma),
        "signs": "".join("+0-"[1 - s] for s in signs),
        "rational_representative": rep.to_json(),
        "verdict_at_sigma": sheaf.verdict(E, fam, sigma).to_json(),
        "verdict_at_representative": sheaf.verdict(E, fam, rep.sigma).to_json(),
    }
    if report["verdict_at_sigma"] != report["verdict_at_representative"]:
        raise CertificateFailure("verdict differs between sigma and its rational representative")
    return report, [{"signs": report["signs"], "representative": report["rational_representative"]}]


def cmd_stability(sc: Scenario, args) -> tuple[dict, list]:
    E, fam = sc.target_and_family()
    sigma = _sigma_arg(sc, args)
    v = sheaf.verdict(E, fam, sigma)
    vec = sheaf.verdict_vector(E, fam, sigma)
    rows = [{"candidate": F.label, "order": o.name} for F, o in zip(fam, vec)]
    report = {
        "command": "stability",
        "target": E.label,
        "sigma": _fmt(sigma),
        "reduced_polynomial": _fmt(sheaf.reduced_hilbert(E, sigma).coeffs),
        "verdict": v.to_json(),
        "comparisons": rows,
        "relative_to_family": True,
    }
    return report, rows


# ----------------------------------------------------------------------
# quiver side


def _cap(args) -> int:
    return parse_caps(args.caps)["subspace"]


def cmd_quiver(sc: Scenario, args) -> tuple[dict, list]:
    rep = sc.representation("rep")
    sigma = _sigma_arg(sc, args)
    cap = _cap(args)
    ops = rep.ops
    action = args.action
    if action == "check":
        strategy = sc.get("strategy", "auto")
        v = quiver.semistability_check(rep, sigma, strategy, seed=args.seed, trials=int(sc.get("trials", 64)), cap=cap)
        if v.witness is not None and not (quiver.is_submodule(rep, v.witness) and quiver.is_proper(rep, v.witness)):
            raise CertificateFailure("destabilizing witness failed re-verification")
        report = {
            "command": "quiver check",
            "rep": rep.label,
            "sigma": _fmt(sigma),
            "theta": _fmt(quiver.theta_vector(sigma, rep.dims)),
            "result": v.to_json(ops),
        }
        return report, [{"rep": rep.label, "verdict": v.kind, "definitive": v.definitive}]
    if action == "hn":
        steps = quiver.hn_filtration(rep, sigma, cap)
        factors = quiver.hn_factors(rep, steps)
        ss = [quiver.slope_semistable(f, sigma, cap) for f in factors]
        if not all(ss):
            raise CertificateFailure("an HN factor is not semistable")
        rows = [
            {"step": k + 1, "dims": s.sub.dims.to_json(), "factor_dims": f.dims.to_json(), "factor_slope": quiver.format_slope(s.slope)}
            for k, (s, f) in enumerate(zip(steps, factors))
        ]
        return {"command": "quiver hn", "rep": rep.label, "sigma": _fmt(sigma), "filtration": rows}, rows
    if action == "jh":
        steps = quiver.jh_filtration(rep, sigma, cap)
        factors = quiver.hn_factors(rep, steps)
        rows = []
        for k, (s, f) in enumerate(zip(steps, factors)):
            stable = quiver.semistability_check(f, sigma, "exhaustive", cap=cap).kind == "Stable"
            if not stable:
                raise CertificateFailure("a Jordan-Hoelder factor is not stable")
            rows.append({"step": k + 1, "dims": s.sub.dims.to_json(), "factor_dims": f.dims.to_json(), "factor_stable": stable})
        return {"command": "quiver jh", "rep": rep.label, "sigma": _fmt(sigma), "filtration": rows}, rows
    if action == "sequiv":
        other = sc.representation("rep2")
        r = quiver.s_equivalent(rep, other, sigma, cap, seed=args.seed)
        report = {
            "command": "quiver sequiv",
            "rep": rep.label,
            "rep2": other.label,
            "sigma": _fmt(sigma),
            "s_equivalent": r.equivalent,
            "heuristic": r.heuristic,
        }
        return report, [{"rep": rep.label, "rep2": other.label, "s_equivalent": r.equivalent, "heuristic": r.heuristic}]
    raise ScenarioError(f"unknown quiver action {action!r}")


# ----------------------------------------------------------------------
# cones


def cmd_cone(sc: Scenario, args) -> tuple[dict, list]:
    T = sc.tensor()
    action = args.action
    if action == "hodge":
        Ls = [sc.vector("L")] if "L" in sc.data else [tuple(x) for x in T.ample_samples]
        rows = []
        for L in Ls:
            sig = cones.signature(cones.q_form_matrix(T, L))
            rows.append({"L": _fmt(L), "signature": list(sig), "hodge_ok": cones.hodge_signature_ok(T, L)})
        if not all(r["hodge_ok"] for r in rows):
            raise CertificateFailure("signature differs from (1, rho-1, 0)")
        return {"command": "cone hodge", "tensor": T.name, "results": rows}, rows
    if action == "kplus":
        L, beta = sc.vector("L"), sc.vector("beta")
        ok = cones.kplus_contains(T, L, beta)
        row = {"L": _fmt(L), "beta": _fmt(beta), "in_kplus": ok}
        return {"command": "cone kplus", "tensor": T.name, **row}, [row]
    if action == "bogomolov":
        F, L = sc.chern("chern"), sc.vector("L")
        beta = scalar(sc.get("beta_const", 0), "$.beta_const")
        row = {
            "discriminant": format_scalar(cones.discriminant_pair(F, T, L)),
            "discriminant_std": format_scalar(cones.discriminant_std(F, T, L)),
            "bogomolov_unstable": cones.bogomolov_unstable(F, T, L, beta),
        }
        return {"command": "cone bogomolov", "tensor": T.name, **row}, [row]
    if action == "identity":
        A, B, L = sc.chern("chern_A"), sc.chern("chern_B"), sc.vector("L")
        chk = cones.extension_discriminant_identity(A, B, T, L)
        row = {"lhs": format_scalar(chk.lhs), "rhs": format_scalar(chk.rhs), "equal": chk.equal}
        if not chk.equal:
            raise CertificateFailure(f"identity failed: {row}")
        return {"command": "cone identity", "tensor": T.name, "normalization": "2 r c2 - (r-1) c1^2", **row}, [row]
    if action == "path":
        g0, gi = sc.vector("gamma0"), sc.vector("gamma_inf")
        L1, L2 = sc.vector("L1"), sc.vector("L2")
        n = int(sc.get("t_samples", 101))
        cert = cones.cplus_path_certificate(T, g0, gi, L1, L2, t_samples=n)
        rows = []
        for p in cert.points:
            ok = cones.verify_path_point(T, g0, gi, L1, L2, p)
            rows.append({"u": str(p.u), "s": None if p.s is None else str(p.s), "beta": None if p.beta is None else _fmt(p.beta), "verified": ok})
        report = {"command": "cone path", "tensor": T.name, "ok": cert.ok, "points": rows}
        if not cert.ok or not all(r["verified"] for r in rows):
            raise CertificateFailure(f"{len(cert.failures)} path point(s) without a certificate")
        return report, rows
    raise ScenarioError(f"unknown cone action {action!r}")


# ----------------------------------------------------------------------
# approximation


def cmd_approx(sc: Scenario | None, args) -> tuple[dict, list]:
    if args.action == "split":
        tau = scalar(args.tau, "--tau")
        theta = scalar(args.theta, "--theta")
        lam = None if args.lam is None else Fraction(parse_scalar(args.lam))
        sp = kahler.split_pair(tau, theta, lam)
        r1, r2 = sp.residuals(tau, theta)
        row = {"tau": format_scalar(tau), "theta": format_scalar(theta), **sp.to_json(),
               "verification": "ok" if sp.verify(tau, theta) else "failed",
               "residuals": [format_scalar(r1), format_scalar(r2)]}
        if row["verification"] != "ok":
            raise CertificateFailure("split identities failed")
        return {"command": "approx split", **row}, [row]
    if args.action == "omega":
        if sc is None:
            raise ScenarioError("approx omega needs --scenario")
        T = sc.tensor()
        omega = sc.vector("omega")
        cands = sc.get("candidates")
        if cands is None:
            cands = kahler.nearby_candidates(T, omega)
        else:
            cands = [scalars_of(c, f"$.candidates[{k}]") for k, c in enumerate(cands)]
        dec = kahler.decompose_omega(T, omega, cands, reduced=bool(sc.get("reduced", False)))
        chk = kahler.verify_decomposition(T, dec)
        if not chk.ok:
            raise CertificateFailure("decomposition identities failed")
        report = {"command": "approx omega", "tensor": T.name, "decomposition": dec.to_json(), "verification": chk.to_json()}
        rows = [{"j": k + 1, "class": [str(x) for x in L], "weight": format_scalar(w)} for k, (L, w) in enumerate(zip(dec.classes, dec.weights))]
        return report, rows
    raise ScenarioError(f"unknown approx action {args.action!r}")


def scalars_of(values, path):
    from .io import scalars

    return scalars(values, path)


# ----------------------------------------------------------------------
# vgit


def cmd_vgit(sc: Scenario, args) -> tuple[dict, list]:
    reps = sc.representations()
    scan = sc.require("scan")
    labels = scan.get("samples", list(reps))
    try:
        samples = [reps[x] for x in labels]
    except KeyError as exc:
        raise ScenarioError(f"$.scan.samples: unknown representation {exc}") from None
    from .io import scalars

    start = scalars(scan["start"], "$.scan.start")
    end = scalars(scan["end"], "$.scan.end")
    steps = args.steps if args.steps is not None else int(scan.get("steps", 16))
    trace = vgit.sigma_scan(samples, start, end, steps=steps, strategy=scan.get("strategy", "auto"),
                            seed=args.seed, cap=_cap(args))
    report = {"command": "vgit scan", "trace": trace.to_json()}
    declared = scan.get("candidates")
    if declared is not None:
        walls = vgit.module_walls(samples[0].dims, [quiver.DimVector(tuple(c)) for c in declared])
        audit = vgit.audit_boundaries(trace, walls)
        report["walls"] = [w.to_json() for w in walls]
        report["wall_audit"] = [
            {"t_interval": [str(lo), str(hi)], "wall_t": None if hit is None else format_scalar(hit)} for (lo, hi), hit in audit
        ]
        if any(hit is None for _, hit in audit):
            raise CertificateFailure("a boundary lies on no declared wall")
    rows = [f.to_json() for f in trace.flips]
    return report, [{"kind": r["kind"], "t_interval": r["t_interval"], "t0": r["t0"], "gained": r["gained"],
                     "lost": r["lost"], "inclusion_holds": r["inclusion_holds"]} for r in rows]


# ----------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file (schema 1)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--caps", help="caps, e.g. '{subspace:1000000}'")
    common.add_argument("--sigma", help="comma-separated stability parameter overriding the scenario")

    p = argparse.ArgumentParser(prog="stabctl", description="Exact stability computations.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in (("walls", cmd_walls), ("chambers", cmd_chambers), ("locate", cmd_locate), ("stability", cmd_stability)):
        s = sub.add_parser(name, parents=[common])
        s.set_defaults(fn=fn, needs_scenario=True)

    q = sub.add_parser("quiver").add_subparsers(dest="action", required=True)
    for a in ("check", "hn", "jh", "sequiv"):
        q.add_parser(a, parents=[common]).set_defaults(fn=cmd_quiver, needs_scenario=True)

    c = sub.add_parser("cone").add_subparsers(dest="action", required=True)
    for a in ("hodge", "kplus", "bogomolov", "identity", "path"):
        c.add_parser(a, parents=[common]).set_defaults(fn=cmd_cone, needs_scenario=True)

    ap = sub.add_parser("approx").add_subparsers(dest="action", required=True)
    sp = ap.add_parser("split", parents=[common])
    sp.add_argument("--tau", required=True)
    sp.add_argument("--theta", required=True)
    sp.add_argument("--lam", help="explicit rational lambda")
    sp.set_defaults(fn=cmd_approx, needs_scenario=False)
    ap.add_parser("omega", parents=[common]).set_defaults(fn=cmd_approx, needs_scenario=True)

    vg = sub.add_parser("vgit").add_subparsers(dest="action", required=True)
    vs = vg.add_parser("scan", parents=[common])
    vs.add_argument("--steps", type=int)
    vs.set_defaults(fn=cmd_vgit, needs_scenario=True)
    return p


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    fn: Callable = args.fn
    try:
        sc = None
        if args.scenario:
            sc = Scenario.load(args.scenario)
        elif args.needs_scenario:
            raise ScenarioError("--scenario is required for this command")
        report, rows = fn(sc, args)
    except quiver.CapExceeded as exc:
        print(f"stabctl: cap exceeded: {exc}", file=stderr)
        return EXIT_CAP
    except (chambers.InfeasibleError, CertificateFailure) as exc:
        print(f"stabctl: {exc}", file=stderr)
        return EXIT_INFEASIBLE
    except (ScenarioError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"stabctl: input error: {exc}", file=stderr)
        return EXIT_INPUT
    text = dump_json(report) if args.format == "json" else dump_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
