"""Command-line interface.

Subcommands map one-to-one onto library modules: ``spectrum``, ``evolve``,
``design`` (pst / bound / pgt), ``optimize``, ``glue`` and ``sequences``.
Every invocation writes a run manifest (JSON) recording the command, resolved
inputs, output files, wall time and any error, so results can be reproduced
byte-for-byte.

Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 infeasible design.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4


def _apply_threads(threads):
    """Cap BLAS worker threads before numpy spins up its pools."""
    if threads is None:
        threads = os.environ.get("QSTC_THREADS")
    if threads is None:
        return None
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(threads))
    return threads


def _write_json(payload, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommand implementations; each returns (summary_payload, output_paths)
# ---------------------------------------------------------------------------


def _cmd_spectrum(args):
    import numpy as np

    from . import chains, exact, spectral

    spec = chains.load_spec(args.spec_file)
    h = chains.build_hamiltonian(spec)
    spectrum = spectral.decompose(h)
    payload = {
        "N": spec.n,
        "k": spec.k,
        "numbering": spec.numbering.value,
        "spectrum": spectral.spectrum_to_dict(spectrum),
    }
    if args.verify_lemmas:
        report = spectral.verify_lemmas(spec)
        payload["lemmas"] = {
            "lemma1": report.lemma1,
            "lemma2": report.lemma2,
            "lemma3": report.lemma3,
            "lemma4": report.lemma4,
            "violations": {k: str(v) for k, v in report.violations.items()},
        }
    if args.exact:
        from .errors import UnsupportedInputError

        couplings = spec.t + spec.w + spec.g
        if any(abs(c - couplings[0]) > 0 for c in couplings) or couplings[0] != round(
            couplings[0]
        ):
            raise UnsupportedInputError(
                "--exact needs a homogeneous integer-coupling chain"
            )
        payload["exact"] = exact.char_poly_report(spec.k).to_dict()
    outputs = []
    if args.out:
        _write_json(payload, args.out)
        outputs.append(args.out)
    evs = np.asarray(payload["spectrum"]["eigenvalues"])
    print(f"N={spec.n}  eigenvalues in [{evs.min():.6g}, {evs.max():.6g}]  "
          f"null multiplicity {payload['spectrum']['null_multiplicity']}")
    if "lemmas" in payload:
        lem = payload["lemmas"]
        print("lemmas:", ", ".join(f"{k}={lem[k]}" for k in ("lemma1", "lemma2", "lemma3", "lemma4")))
    if "exact" in payload:
        ex = payload["exact"]
        print(f"exact: max factor degree {ex['max_degree']}  sequence {ex['sequence']}")
    return payload, outputs


def _cmd_evolve(args):
    import numpy as np

    from . import chains, dynamics
    from .errors import ValidationError

    if args.samples < 2:
        raise ValidationError(f"samples must be >= 2, got {args.samples}")
    if args.tmax <= 0:
        raise ValidationError(f"tmax must be positive, got {args.tmax}")
    spec = chains.load_spec(args.spec_file)
    times = np.linspace(0.0, args.tmax, args.samples)
    trace = dynamics.transfer_probability(spec, times)
    outputs = []
    if args.out:
        trace.to_csv(args.out)
        outputs.append(args.out)
    t_star, p_star = trace.peak
    print(f"peak: t*={t_star:.12g}  P*={p_star:.12g}")
    return {"peak": {"t": t_star, "P": p_star}, "samples": args.samples}, outputs


def _cmd_design_pst(args):
    from . import design

    d = design.design_pst(args.family, args.k, args.v1)
    payload = d.to_dict()
    outputs = []
    if args.out:
        _write_json(payload, args.out)
        outputs.append(args.out)
    pairs = ", ".join(f"{k}={v:.12g}" for k, v in d.couplings.items())
    print(f"{d.family} k={d.k} v1={d.v1:g}: {pairs}")
    return payload, outputs


def _cmd_design_bound(args):
    from . import design

    value = design.dimerized_upper_bound(args.w)
    print(f"P_up({args.w:g}) = {value:.15g}")
    return {"w": args.w, "P_up": value}, []


def _cmd_design_pgt(args):
    from . import chains, dynamics, design

    spec = chains.load_spec(args.spec_file)
    series = dynamics.chain_series(spec)
    result = design.pgt_search(series, args.epsilon, args.tmax)
    payload = result.to_dict()
    outputs = []
    if args.out:
        _write_json(payload, args.out)
        outputs.append(args.out)
    if result.reached:
        print(f"reached: t={result.t_found:.12g}  infidelity={result.best_infidelity:.3g}")
    else:
        print(f"not reached: best t={result.best_t:.12g}  "
              f"infidelity={result.best_infidelity:.3g}")
    return payload, outputs


def _cmd_optimize(args):
    from . import optimize as qopt
    from .errors import ValidationError

    with open(args.config, encoding="utf-8") as fh:
        config = json.load(fh)
    budget = int(config.get("budget", 20000))
    seed = int(config["seed"])
    scenario = config["scenario"]
    bounds = tuple(tuple(b) for b in config.get("bounds", [list(qopt.DEFAULT_BOUNDS)]))
    window_max = bool(config.get("window_max", False))

    outputs = []
    if "sweep" in config:
        sw = config["sweep"]
        k_values = [int(kv) for kv in sw.get("k", [config["k"]])]
        fixed_name = "w" if scenario == qopt.Scenario.FIXED_W_OPT_G.value else "alpha"
        fixed_values = sw.get(fixed_name, [None])
        problems = []
        for k in k_values:
            n = 3 * k + 5
            t_values = [float(m) * n for m in sw.get("T_multiples", [])] + [
                float(t) for t in sw.get("T", [])
            ]
            if not t_values:
                raise ValidationError("sweep needs 'T_multiples' or 'T'")
            for fv in fixed_values:
                for t_val in sorted(t_values):
                    fixed = {} if fv is None else {fixed_name: float(fv)}
                    problems.append(
                        qopt.OptProblem(
                            scenario=scenario,
                            k=k,
                            arrival_time=t_val,
                            seed=seed,
                            bounds=bounds,
                            fixed_params=fixed,
                            window_max=window_max,
                        )
                    )
        results = qopt.sweep(problems, budget, warm_start=config.get("warm_start", True))
        rows = qopt.sweep_csv_rows(results)
        payload = {
            "sweep": [
                (res.to_dict() if res is not None else {"error": err})
                for res, err in results
            ]
        }
        if args.out_csv:
            with open(args.out_csv, "w", encoding="utf-8") as fh:
                fh.write("\n".join(rows) + "\n")
            outputs.append(args.out_csv)
        if args.out:
            _write_json(payload, args.out)
            outputs.append(args.out)
        ok = sum(1 for res, _ in results if res is not None)
        print(f"sweep: {ok}/{len(results)} problems solved")
        for row in rows[1:]:
            print(" ", row)
        return payload, outputs

    k = int(config["k"])
    n = 3 * k + 5
    if "T" in config:
        arrival = float(config["T"])
    elif "T_multiple" in config:
        arrival = float(config["T_multiple"]) * n
    else:
        raise ValidationError("config needs 'T' or 'T_multiple'")
    problem = qopt.OptProblem(
        scenario=scenario,
        k=k,
        arrival_time=arrival,
        seed=seed,
        bounds=bounds,
        fixed_params=config.get("fixed_params", {}),
        window_max=window_max,
    )
    result = qopt.optimize(problem, budget)
    payload = result.to_dict()
    if args.out:
        _write_json(payload, args.out)
        outputs.append(args.out)
    print(f"best P = {result.best_p:.12g}  (-log10 infidelity {result.neg_log_infidelity:.3g}, "
          f"{result.evaluations} evaluations)")
    return payload, outputs


def _cmd_glue(args):
    import numpy as np

    from . import chains, spectral

    parent = chains.load_spec(args.spec_file)
    result = spectral.glue(parent, args.bridge_v)
    child_ev = np.linalg.eigvalsh(chains.build_hamiltonian(result.child).toarray())
    parent_ev = np.linalg.eigvalsh(chains.build_hamiltonian(parent).toarray())
    contained, worst = spectral.match_contained(parent_ev, child_ev, tol=1e-8)
    payload = {
        "parent_N": parent.n,
        "child_N": result.child.n,
        "bridge_v": args.bridge_v,
        "child_spec": chains.spec_to_dict(result.child),
        "containment_ok": bool(contained),
        "containment_worst_deviation": float(worst),
    }
    outputs = []
    if args.out:
        chains.save_spec(result.child, args.out)
        outputs.append(args.out)
    print(f"glued N={parent.n} -> N={result.child.n}; parent spectrum contained: {contained}")
    return payload, outputs


def _cmd_sequences(args):
    from . import exact

    rows = []
    for k in range(1, args.k_max + 1):
        report = exact.char_poly_report(k, allow_large=args.k_max > exact.DEFAULT_K_CAP)
        rows.append(
            {
                "k": k,
                "N": report.n,
                "sequence": report.sequence or "",
                "poly": report.max_degree,
                "certification": report.certification,
            }
        )
    outputs = []
    if args.out:
        _write_json({"rows": rows}, args.out)
        outputs.append(args.out)
    print("k,N,sequence,poly")
    for row in rows:
        print(f"{row['k']},{row['N']},{row['sequence']},{row['poly']}")
    return {"rows": rows}, outputs


# ---------------------------------------------------------------------------
# argument parsing and manifest plumbing
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qstc",
        description="Decorated transmon-chain spectra, state transfer and coupling design",
    )
    parser.add_argument("--threads", type=int, default=None,
                        help="cap worker threads (default: QSTC_THREADS or unlimited)")
    parser.add_argument("--manifest", default=None,
                        help="run-manifest path (default: qstc-manifest.json)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigendecomposition of a chain spec")
    p.add_argument("spec_file")
    p.add_argument("--verify-lemmas", action="store_true")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("evolve", help="corner-to-corner transfer trace")
    p.add_argument("spec_file")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evolve)

    pd = sub.add_parser("design", help="inverse designs and bounds")
    dsub = pd.add_subparsers(dest="design_command", required=True)
    p = dsub.add_parser("pst", help="perfect-state-transfer couplings")
    p.add_argument("--family", choices=("n8", "n11"), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--v1", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_design_pst)
    p = dsub.add_parser("bound", help="dimerized probability envelope")
    p.add_argument("--w", type=float, required=True)
    p.set_defaults(func=_cmd_design_bound)
    p = dsub.add_parser("pgt", help="pretty-good-transfer arrival search")
    p.add_argument("--spec", dest="spec_file", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_design_pgt)

    p = sub.add_parser("optimize", help="coupling optimization from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--out-csv")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("glue", help="double a mirror-symmetric chain through a bridge qubit")
    p.add_argument("spec_file")
    p.add_argument("--bridge-v", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_glue)

    p = sub.add_parser("sequences", help="solvability table for homogeneous chains")
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sequences)

    return parser


def _classify_error(exc):
    from . import errors

    if isinstance(exc, errors.InfeasibleDesignError):
        return EXIT_INFEASIBLE
    if isinstance(exc, errors.NumericalError):
        return EXIT_NUMERICAL
    if isinstance(
        exc,
        (
            errors.ValidationError,
            errors.StructuralError,
            errors.UnsupportedSequenceError,
            errors.UnsupportedInputError,
            json.JSONDecodeError,
            FileNotFoundError,
            KeyError,
            ValueError,
        ),
    ):
        return EXIT_INPUT
    return 1


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    from . import __version__

    manifest = {
        "command": ["qstc"] + argv,
        "tool_version": __version__,
        "inputs": {
            k: v for k, v in vars(args).items() if k not in ("func",) and v is not None
        },
        "outputs": [],
        "seed": None,
        "wall_time": None,
        "error": None,
    }
    manifest_path = args.manifest or "qstc-manifest.json"
    start = time.monotonic()
    try:
        threads = _apply_threads(args.threads)
        if threads is not None:
            manifest["inputs"]["threads"] = threads
        payload, outputs = args.func(args)
        manifest["outputs"] = outputs
        if isinstance(payload, dict):
            seed = payload.get("problem", {}).get("seed") if "problem" in payload else None
            manifest["seed"] = seed if seed is not None else payload.get("seed")
        code = 0
    except Exception as exc:
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        code = _classify_error(exc)
        print(f"error: {manifest['error']}", file=sys.stderr)
    manifest["wall_time"] = time.monotonic() - start
    try:
        _write_json(manifest, manifest_path)
    except OSError as exc:  # manifest failure must not mask the result
        print(f"warning: could not write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
