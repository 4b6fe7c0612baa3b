"""Command-line entry point: ``mzip {fit,simulate,study,summarize,idr,diagnose}``.

Every option can also come from a flat ``key = value`` file given with
``--config`` (keys spelled like the long flags, with or without dashes);
explicit flags win over the file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .archive import ChainArchive
from .diagnostics import diagnostics, diagnostics_table, trace_table
from .errors import InvalidArgument, InvalidState, NumericOverflow
from .io import atomic_write_text, format_table, ingest_dataset
from .model import IDR_MODES, R_PRIORS, Dataset, Hyperparameters, IdrQuery, marginal_idr
from .sampler import SamplerConfig, run_chain, summarize_selection
from .simulation import SCENARIOS, ScenarioSpec, default_hyper, generate_dataset, run_study

log = logging.getLogger("mzip")


# ---------------------------------------------------------------- parser

def _common_sampler(p):
    p.add_argument("--scans", type=int, default=20000, help="total scans per chain")
    p.add_argument("--burnin", type=int, default=None, help="default: half of --scans")
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--omega", type=float, default=None, help="prior inclusion probability")
    p.add_argument("--cutoff", type=float, default=0.5)
    p.add_argument("--r-prior", choices=R_PRIORS, default="marginal-uniform")
    p.add_argument("--psi", type=float, default=3.0, help="Sigma_V prior scale: (psi I, q + psi + 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mzip", description="Bayesian variable selection for multivariate "
                                 "zero-inflated Poisson counts")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit the model to count data")
    f.add_argument("--config")
    f.add_argument("--counts")
    f.add_argument("--covariates-x")
    f.add_argument("--covariates-z", help="default: same file as --covariates-x")
    f.add_argument("--offset", default="rowsum", help="'rowsum', 'one', or a file path")
    f.add_argument("--forced-in", default="", help="comma-separated covariate names kept in both parts")
    f.add_argument("--chains", type=int, default=2)
    f.add_argument("--store-latent", action="store_true")
    f.add_argument("--out")
    _common_sampler(f)

    s = sub.add_parser("simulate", help="write simulated scenario datasets")
    s.add_argument("--config")
    s.add_argument("--scenario", choices=SCENARIOS)
    s.add_argument("--replicates", type=int, default=1)
    s.add_argument("--n", type=int, default=300)
    s.add_argument("--q", type=int, default=20)
    s.add_argument("--covariate-sd", type=float, default=float(np.sqrt(2.0)))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")

    st = sub.add_parser("study", help="run a replicate simulation study")
    st.add_argument("--config")
    st.add_argument("--scenario", choices=SCENARIOS)
    st.add_argument("--replicates", type=int, default=10)
    st.add_argument("--n", type=int, default=300)
    st.add_argument("--q", type=int, default=20)
    st.add_argument("--covariate-sd", type=float, default=float(np.sqrt(2.0)))
    st.add_argument("--data-seed", type=int, default=None, help="default: --seed")
    st.add_argument("--no-uzip", action="store_true")
    st.add_argument("--fdr", type=float, default=0.05)
    st.add_argument("--workers", type=int, default=1)
    st.add_argument("--out")
    _common_sampler(st)

    sm = sub.add_parser("summarize", help="selection summary of archived chains")
    sm.add_argument("--config")
    sm.add_argument("--chain", nargs="+")
    sm.add_argument("--cutoff", type=float, default=0.5)
    sm.add_argument("--out")

    i = sub.add_parser("idr", help="posterior summary of the induced marginal IDR")
    i.add_argument("--config")
    i.add_argument("--chain")
    i.add_argument("--counts")
    i.add_argument("--covariates-x")
    i.add_argument("--covariates-z")
    i.add_argument("--offset", default="rowsum")
    i.add_argument("--outcome")
    i.add_argument("--covariate")
    i.add_argument("--mode", choices=IDR_MODES, default="at-means")
    i.add_argument("--profile", default=None,
                   help="name=value pairs for the other binary-part covariates, e.g. age=16")
    i.add_argument("--baseline", type=float, default=0.0)
    i.add_argument("--out")

    d = sub.add_parser("diagnose", help="ESS, Geweke z-scores and trace export")
    d.add_argument("--config")
    d.add_argument("--chain")
    d.add_argument("--out")
    return ap


def _read_config(path) -> dict:
    out = {}
    p = Path(path)
    if not p.exists():
        raise InvalidArgument(f"config file {p} not found")
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"{p}:{lineno}: expected 'key = value'")
        k, v = (t.strip() for t in line.split("=", 1))
        out[k.lstrip("-").replace("-", "_")] = v
    return out


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "config", None):
        cfg = _read_config(args.config)
        sub = ap._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        unknown = sorted(set(cfg) - set(actions) - {"command"})
        if unknown:
            raise InvalidArgument(f"unknown config keys: {unknown}")
        defaults = {}
        for k, v in cfg.items():
            if k == "command":
                continue
            a = actions[k]
            if a.nargs == 0:
                defaults[k] = v.lower() in ("1", "true", "yes", "on")
            elif a.nargs == "+":
                defaults[k] = v.split()
            else:
                try:
                    defaults[k] = a.type(v) if a.type else v
                except ValueError:
                    raise InvalidArgument(f"config key {k!r}: cannot parse {v!r}") from None
                if a.choices and defaults[k] not in a.choices:
                    raise InvalidArgument(f"config key {k!r}: {v!r} not in {list(a.choices)}")
        sub.set_defaults(**defaults)
        args = ap.parse_args(argv)
    return args


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        raise InvalidArgument("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _echo(out: Path, args) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "verbose")}
    atomic_write_text(out / "resolved_config.json", json.dumps(cfg, indent=2, sort_keys=True) + "\n")


def _sampler_config(args, **kw) -> SamplerConfig:
    burn = args.scans // 2 if args.burnin is None else args.burnin
    return SamplerConfig(n_scans=args.scans, burn_in=burn, thin=args.thin, seed=args.seed, **kw)


def _chain_seed(seed: int, c: int) -> int:
    return int(np.random.SeedSequence([seed, c]).generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------- commands

def _load_data(args) -> Dataset:
    _require(args, "counts", "covariates_x")
    off = args.offset
    if off in ("rowsum", "one"):
        return ingest_dataset(args.counts, args.covariates_x, args.covariates_z, offset=off)
    return ingest_dataset(args.counts, args.covariates_x, args.covariates_z, offset="file", offset_path=off)


def selection_rows(chain: ChainArchive, cutoff: float, chain_label: str = ""):
    s = summarize_selection(chain, cutoff)
    outs = chain.names["outcomes"] or [f"y{j + 1}" for j in range(chain.dims["q"])]
    cx = chain.names["covariates_x"] or [f"x{k + 1}" for k in range(chain.dims["p_x"])]
    cz = chain.names["covariates_z"] or [f"z{l + 1}" for l in range(chain.dims["p_z"])]
    rows = []
    for j, o in enumerate(outs):
        for l, c in enumerate(cz):
            rows.append([chain_label, o, c, "binary", s.prob_delta[j, l], s.pm_alpha[j, l], s.sd_alpha[j, l],
                         s.selected_delta[j, l]])
        for k, c in enumerate(cx):
            rows.append([chain_label, o, c, "count", s.prob_gamma[j, k], s.pm_beta[j, k], s.sd_beta[j, k],
                         s.selected_gamma[j, k]])
    return rows


SELECTION_HEADER = ["chain", "outcome", "covariate", "part", "inclusion_prob", "cond_pm", "cond_sd", "selected"]


def _corr(m):
    d = np.sqrt(np.diag(m))
    return m / np.outer(d, d)


def cmd_fit(args) -> int:
    _require(args, "out")
    data = _load_data(args)
    forced = [c.strip() for c in args.forced_in.split(",") if c.strip()]
    unknown = [c for c in forced if c not in data.covariate_names_x and c not in data.covariate_names_z]
    if unknown:
        raise InvalidArgument(f"--forced-in names not found among covariates: {unknown}")
    omega = 0.5 if args.omega is None else args.omega
    hyper = Hyperparameters.default(
        data.q, data.p_x, data.p_z, omega=omega, psi=args.psi,
        forced_in_count=np.array([c in forced for c in data.covariate_names_x]),
        forced_in_binary=np.array([c in forced for c in data.covariate_names_z]))
    hyper.r_prior = args.r_prior
    hyper.validate(data)
    if args.chains < 1:
        raise InvalidArgument("--chains must be positive")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    args.omega = omega
    _echo(out, args)

    chains, sel_rows, diag_rows = [], [], []
    for c in range(args.chains):
        cfg = _sampler_config(args, store_latent=args.store_latent)
        cfg.seed = _chain_seed(args.seed, c)
        log.info("chain %d: %d scans", c + 1, cfg.n_scans)
        ch = run_chain(data, hyper, cfg)
        ch.save(out / f"chain{c + 1}")
        chains.append(ch)
        sel_rows += selection_rows(ch, args.cutoff, f"chain{c + 1}")
        for r in diagnostics(ch):
            diag_rows.append([f"chain{c + 1}", r.name, r.mean, r.sd, r.ess, r.geweke_z, r.constant])
    atomic_write_text(out / "selection.tsv", format_table(SELECTION_HEADER, sel_rows))
    atomic_write_text(out / "diagnostics.tsv", format_table(
        ["chain", "parameter", "mean", "sd", "ess", "geweke_z", "constant"], diag_rows))

    # posterior means side by side, one column per chain
    from .diagnostics import scalar_series

    series = [scalar_series(ch) for ch in chains]
    comp = [[k] + [float(s[k].mean()) for s in series] for k in series[0]]
    atomic_write_text(out / "chain_comparison.tsv",
                      format_table(["parameter"] + [f"chain{c + 1}" for c in range(len(chains))], comp))

    # plot data: inclusion probabilities (pooled) and posterior-median correlation maps
    pooled = [np.concatenate([ch.delta for ch in chains]).mean(axis=0),
              np.concatenate([ch.gamma for ch in chains]).mean(axis=0)]
    rows = []
    for j, o in enumerate(data.outcome_names):
        for l, c in enumerate(data.covariate_names_z):
            rows.append([o, c, "binary", pooled[0][j, l]])
        for k, c in enumerate(data.covariate_names_x):
            rows.append([o, c, "count", pooled[1][j, k]])
    atomic_write_text(out / "inclusion_pooled.tsv",
                      format_table(["outcome", "covariate", "part", "inclusion_prob"], rows))
    r_med = np.median(np.concatenate([ch.r_corr for ch in chains]), axis=0)
    rv_med = np.median(np.concatenate([[_corr(m) for m in ch.sigma_v] for ch in chains]), axis=0)
    for name, mat in (("r_median.tsv", r_med), ("rv_median.tsv", rv_med)):
        atomic_write_text(out / name, format_table(
            ["outcome"] + list(data.outcome_names),
            [[o] + list(mat[j]) for j, o in enumerate(data.outcome_names)]))
    return 0


def cmd_simulate(args) -> int:
    _require(args, "scenario", "out")
    spec = ScenarioSpec(args.scenario, n=args.n, q=args.q, covariate_sd=args.covariate_sd,
                        n_replicates=args.replicates, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _echo(out, args)
    atomic_write_text(out / "scenario.json", json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    for r in range(spec.n_replicates):
        sim = generate_dataset(spec, r)
        d = sim.data
        ids = [f"s{i + 1}" for i in range(d.n)]
        rd = out / f"replicate{r + 1:03d}"
        atomic_write_text(rd / "counts.tsv", format_table(["id"] + list(d.outcome_names),
                                                          [[ids[i]] + list(d.y[i]) for i in range(d.n)]))
        atomic_write_text(rd / "covariates_x.tsv", format_table(["id"] + list(d.covariate_names_x),
                                                                [[ids[i]] + list(d.x[i]) for i in range(d.n)]))
        atomic_write_text(rd / "covariates_z.tsv", format_table(["id"] + list(d.covariate_names_z),
                                                                [[ids[i]] + list(d.z[i]) for i in range(d.n)]))
        truth = [[o, "count", float(spec.b_true[0, j])] for j, o in enumerate(d.outcome_names)]
        truth += [[o, "binary", float(spec.a_true[0, j])] for j, o in enumerate(d.outcome_names)]
        atomic_write_text(rd / "truth.tsv", format_table(["outcome", "part", "coefficient"], truth))
    return 0


def cmd_study(args) -> int:
    _require(args, "scenario", "out")
    spec = ScenarioSpec(args.scenario, n=args.n, q=args.q, covariate_sd=args.covariate_sd,
                        n_replicates=args.replicates, seed=args.seed if args.data_seed is None else args.data_seed)
    omega = 0.1 if args.omega is None else args.omega
    hyper = default_hyper(spec, omega)
    hyper.psi0 = args.psi * np.eye(spec.q)
    hyper.rho0 = spec.q + args.psi + 1.0
    hyper.r_prior = args.r_prior
    hyper.validate()
    cfg = _sampler_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    args.omega = omega
    _echo(out, args)
    rep = run_study(spec, hyper, cfg, cutoff=args.cutoff, level=args.fdr, uzip=not args.no_uzip,
                    workers=args.workers)
    rep.write(out)
    failed = [r.index for r in rep.replicates if not r.ok]
    if failed:
        log.warning("replicates %s failed and are excluded from the aggregates", failed)
    return 0


def cmd_summarize(args) -> int:
    _require(args, "chain", "out")
    rows = []
    for p in args.chain:
        rows += selection_rows(ChainArchive.load(p), args.cutoff, Path(p).name)
    atomic_write_text(Path(args.out), format_table(SELECTION_HEADER, rows))
    return 0


def _lookup(names, value, what):
    if value in names:
        return list(names).index(value)
    raise InvalidArgument(f"{what} {value!r} not found")


def cmd_idr(args) -> int:
    _require(args, "chain", "outcome", "covariate", "out")
    chain = ChainArchive.load(args.chain)
    data = _load_data(args)
    if data.outcome_names != tuple(chain.names["outcomes"]):
        raise InvalidArgument("data outcomes do not match the chain")
    j = _lookup(data.outcome_names, args.outcome, "outcome")
    kc = data.covariate_names_x.index(args.covariate) if args.covariate in data.covariate_names_x else None
    kb = data.covariate_names_z.index(args.covariate) if args.covariate in data.covariate_names_z else None
    if kc is None and kb is None:
        raise InvalidArgument(f"covariate {args.covariate!r} is absent from both model parts")
    profile = None
    if args.profile:
        vals = dict(item.split("=", 1) for item in args.profile.replace(" ", "").split(",") if item)
        others = [c for l, c in enumerate(data.covariate_names_z) if l != kb]
        missing = [c for c in others if c not in vals]
        if missing:
            raise InvalidArgument(f"--profile lacks values for {missing}")
        profile = np.array([float(vals[c]) for c in others])
    q = IdrQuery(outcome=j, count_covariate=kc, binary_covariate=kb, baseline=args.baseline,
                 profile=profile, mode=None if profile is not None else args.mode)
    res = marginal_idr(chain, q, data)
    header = ["outcome", "covariate", "mode", "profile", "median", "lower95", "upper95"]
    if isinstance(res, list):
        rows = [[args.outcome, args.covariate, "per-profile", ";".join(repr(float(v)) for v in prof),
                 s["median"], s["lower"], s["upper"]] for prof, s in res]
    else:
        mode = "profile" if profile is not None else args.mode
        rows = [[args.outcome, args.covariate, mode, args.profile or "", res["median"], res["lower"],
                 res["upper"]]]
    atomic_write_text(Path(args.out), format_table(header, rows))
    return 0


def cmd_diagnose(args) -> int:
    _require(args, "chain", "out")
    chain = ChainArchive.load(args.chain)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "diagnostics.tsv", diagnostics_table(diagnostics(chain)))
    atomic_write_text(out / "trace.tsv", trace_table(chain))
    return 0


COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate, "study": cmd_study, "summarize": cmd_summarize,
            "idr": cmd_idr, "diagnose": cmd_diagnose}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except InvalidArgument as exc:
        print(f"mzip: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InvalidArgument, InvalidState, NumericOverflow, OSError) as exc:
        print(f"mzip {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
