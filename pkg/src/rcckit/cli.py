"""Command-line surface: data synthesis, training, scoring, evaluation,
DAG reconstruction, and the numerical verification harness.

Exit codes: 0 success, 1 usage error, 2 data/model error. Every command is
deterministic given its flags and --seed, down to the output bytes.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._rng import child_seeds
from .causal import decision_rate_curve, infer_dag, pairwise_beliefs, rcc_score
from .embedding import (
    KernelSpec,
    draw_rff_basis,
    embed_sample,
    exact_mmd,
    featurize_pair,
    kernel_value,
    median_heuristic,
    rate_slope_estimate,
    reconstruction_error_bound,
    reconstruction_error_estimate,
    rff_kernel_estimate,
    rff_mmd_sq,
    stack_features,
)
from .forest import TREE_COUNT_GRID, Dataset, cv_select_num_trees, train_forest
from .model_io import (
    ModelBundle,
    ModelFormatError,
    load_model,
    parse_pair_file,
    read_labels_csv,
    save_model,
    write_text_atomic,
)
from .synthgen import (
    EIGHT_DAGS,
    CauseEffectSample,
    MotherParams,
    _standardize,
    build_pair_training_set,
    build_triplet_training_set,
    fit_theta,
    sample_pair,
    sample_theta_grid,
    sample_triplet,
    theta_grid,
)

# Cap on pooled points fed to the median heuristic (it is O(n^2)).
_GAMMA_POOL_CAP = 2000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _seed_value(text: str) -> int:
    value = int(text)
    if not (0 <= value < 2**64):
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _parse_theta(text: str) -> MotherParams:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise ValueError("theta must be 'c,sigma1,sigma2,sigma3,d_f'")
    return MotherParams(
        int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]), int(parts[4])
    )


def _load_theta(args) -> MotherParams:
    if args.theta_file:
        with open(args.theta_file) as fh:
            d = json.load(fh)
        try:
            return MotherParams(d["c"], d["sigma1"], d["sigma2"], d["sigma3"], d["d_f"])
        except (KeyError, TypeError) as e:
            raise ValueError(f"{args.theta_file}: malformed theta file: {e}") from e
    return _parse_theta(args.theta)


def _pair_records(data_dir):
    paths = sorted(Path(data_dir).glob("*.txt"))
    if not paths:
        raise ValueError(f"no .txt data files found in {data_dir}")
    return [parse_pair_file(p) for p in paths]


def _standardized_columns(record) -> np.ndarray:
    return np.column_stack([_standardize(record.columns[:, j]) for j in range(record.n_columns)])


def _pair_sample(record) -> CauseEffectSample:
    if record.n_columns != 2:
        raise ValueError(f"{record.path}: expected 2 columns, got {record.n_columns}")
    cols = _standardized_columns(record)
    return CauseEffectSample(cols[:, 0], cols[:, 1], label=record.label, name=record.name)


def _pooled_gamma(point_sets, seed: int) -> float:
    pooled = np.vstack(point_sets)
    if pooled.shape[0] > _GAMMA_POOL_CAP:
        rng = np.random.default_rng(int(child_seeds(seed, 1)[0]))
        keep = np.sort(rng.choice(pooled.shape[0], _GAMMA_POOL_CAP, replace=False))
        pooled = pooled[keep]
    return median_heuristic(pooled)


def _resolve_pair_gamma(args, theta: MotherParams) -> float:
    if args.gamma is not None:
        return float(args.gamma)
    if args.data:
        sets = [_pair_sample(r).points for r in _pair_records(args.data)]
        return _pooled_gamma(sets, args.seed)
    probe = sample_pair(theta, args.n, int(child_seeds(args.seed, 1)[0]))
    return median_heuristic(probe.points)


def _resolve_triplet_gamma(args, theta: MotherParams) -> float:
    if args.gamma is not None:
        return float(args.gamma)
    if args.data:
        sets = []
        for r in _pair_records(args.data):
            if r.n_columns < 3:
                raise ValueError(f"{r.path}: triplet data needs >= 3 columns")
            sets.append(_standardized_columns(r)[:, :3])
        return _pooled_gamma(sets, args.seed)
    probe = sample_triplet(theta, EIGHT_DAGS[2], args.n, int(child_seeds(args.seed, 1)[0]))
    return median_heuristic(np.column_stack([probe.x, probe.y, probe.z]))


def _format_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def cmd_synth_pairs(args) -> int:
    theta = _load_theta(args)
    out = Path(args.out or "synth-pairs")
    out.mkdir(parents=True, exist_ok=True)
    seeds = child_seeds(args.seed, args.count)
    flip_rng = np.random.default_rng(int(child_seeds(args.seed ^ 0x5EED, 1)[0]))
    lines = ["name,label"]
    for i in range(args.count):
        s = sample_pair(theta, args.n, int(seeds[i]))
        if flip_rng.random() < 0.5:
            s = s.swapped()
        name = f"pair_{i:04d}"
        body = "\n".join(_format_floats(row) for row in np.column_stack([s.x, s.y]))
        write_text_atomic(out / f"{name}.txt", body + "\n")
        lines.append(f"{name},{s.label}")
    write_text_atomic(out / "labels.csv", "\n".join(lines) + "\n")
    print(f"wrote {args.count} pairs to {out}")
    return 0


def cmd_synth_triplets(args) -> int:
    theta = _load_theta(args)
    out = Path(args.out or "synth-triplets")
    out.mkdir(parents=True, exist_ok=True)
    seeds = child_seeds(args.seed, args.count + 1)
    dag_ids = np.random.default_rng(int(seeds[0])).integers(0, 8, size=args.count)
    lines = ["name,dag_id,l1,l2,l3"]
    for i in range(args.count):
        t = sample_triplet(theta, EIGHT_DAGS[int(dag_ids[i])], args.n, int(seeds[1 + i]))
        name = f"triplet_{i:04d}"
        body = "\n".join(
            _format_floats(row) for row in np.column_stack([t.x, t.y, t.z])
        )
        write_text_atomic(out / f"{name}.txt", body + "\n")
        l1, l2, l3 = t.labels
        lines.append(f"{name},{t.dag_id},{l1},{l2},{l3}")
    write_text_atomic(out / "labels.csv", "\n".join(lines) + "\n")
    print(f"wrote {args.count} triplets to {out}")
    return 0


def cmd_fit_theta(args) -> int:
    records = _pair_records(args.data)
    samples = [_pair_sample(r) for r in records]
    gamma = (
        float(args.gamma)
        if args.gamma is not None
        else _pooled_gamma([s.points for s in samples], args.seed)
    )
    spec = KernelSpec.three_scale(gamma)
    seeds = child_seeds(args.seed, 3)
    basis1d = draw_rff_basis(spec, 1, args.m, int(seeds[0]))
    basis2d = draw_rff_basis(spec, 2, args.m, int(seeds[1]))
    feats = [featurize_pair(s.x, s.y, basis1d, basis2d) for s in samples]
    candidates = theta_grid() if args.full_sweep else sample_theta_grid(args.budget, args.seed)
    theta = fit_theta(feats, candidates, args.probe, args.n, basis1d, basis2d, int(seeds[2]))
    out = args.out or "theta.json"
    payload = {
        "c": theta.c,
        "sigma1": theta.sigma1,
        "sigma2": theta.sigma2,
        "sigma3": theta.sigma3,
        "d_f": theta.d_f,
    }
    write_text_atomic(out, json.dumps(payload, sort_keys=True) + "\n")
    print(f"selected theta {theta.astuple()} (gamma={gamma!r}) -> {out}")
    return 0


def _train_common(args, kind: str) -> int:
    theta = _load_theta(args)
    seeds = child_seeds(args.seed, 4)
    if kind == "pair":
        gamma = _resolve_pair_gamma(args, theta)
    else:
        gamma = _resolve_triplet_gamma(args, theta)
    spec = KernelSpec.three_scale(gamma)
    basis1d = draw_rff_basis(spec, 1, args.m, int(seeds[0]))
    joint_dim = 2 if kind == "pair" else 3
    basis_joint = draw_rff_basis(spec, joint_dim, args.m, int(seeds[1]))

    if kind == "pair":
        training = build_pair_training_set(
            theta, args.big_n, args.n, basis1d, basis_joint, int(seeds[2])
        )
    else:
        training = build_triplet_training_set(
            theta, args.big_n, args.n, basis1d, basis_joint, int(seeds[2])
        )
    data = Dataset(
        stack_features([f for f, _ in training]),
        np.asarray([l for _, l in training], dtype=np.int64),
    )
    if args.cv:
        num_trees = cv_select_num_trees(data, TREE_COUNT_GRID, args.folds, int(seeds[3]))
        print(f"cross-validation selected {num_trees} trees")
    else:
        num_trees = args.trees
    forest = train_forest(data, num_trees, int(seeds[3]))
    bundle = ModelBundle(
        kind=kind,
        spec=spec,
        bases=(basis1d, basis_joint),
        forest=forest,
        metadata={
            "theta": list(theta.astuple()),
            "N": args.big_n,
            "n": args.n,
            "m": args.m,
            "gamma": gamma,
            "seed": args.seed,
        },
    )
    if not args.model:
        raise ValueError("--model is required to store the trained model")
    save_model(bundle, args.model)
    print(f"trained {kind} model ({num_trees} trees, m={args.m}) -> {args.model}")
    return 0


def cmd_train_pair(args) -> int:
    return _train_common(args, "pair")


def cmd_train_triplet(args) -> int:
    return _train_common(args, "triplet")


def _load_pair_bundle(args) -> ModelBundle:
    if not args.model:
        raise ValueError("--model is required")
    bundle = load_model(args.model)
    if bundle.kind != "pair":
        raise ValueError(f"expected a pair model, got {bundle.kind!r}")
    return bundle


def cmd_score(args) -> int:
    bundle = _load_pair_bundle(args)
    lines = ["name,score,label"]
    for path in args.files:
        sample = _pair_sample(parse_pair_file(path))
        score = rcc_score(bundle.forest, sample, bundle.basis1d, bundle.basis_joint)
        lines.append(f"{sample.name},{float(score.value)!r},{score.predicted_label}")
    text = "\n".join(lines) + "\n"
    if args.out:
        write_text_atomic(args.out, text)
        print(f"wrote scores for {len(args.files)} files to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    bundle = _load_pair_bundle(args)
    if not args.labels:
        raise ValueError("--labels is required for eval")
    labels = read_labels_csv(args.labels)
    records = _pair_records(args.data)
    scores = []
    truths = []
    for record in records:
        if record.name not in labels:
            raise ValueError(f"no label for {record.name} in {args.labels}")
        sample = _pair_sample(record)
        scores.append(rcc_score(bundle.forest, sample, bundle.basis1d, bundle.basis_joint))
        truths.append(labels[record.name])
    curve = decision_rate_curve(scores, truths)
    lines = ["rate,accuracy"]
    for r, a in zip(curve.rates, curve.accuracies):
        lines.append(f"{float(r)!r},{float(a)!r}")
    out = args.out or "decision_rate.csv"
    write_text_atomic(out, "\n".join(lines) + "\n")
    print(f"accuracy at full decision rate: {curve.accuracies[-1]:.4f} ({out})")
    return 0


def _dag_to_dot(dag) -> str:
    lines = ["digraph causal_dag {"]
    for name in dag.names:
        lines.append(f'  "{name}";')
    for (a, b) in sorted(dag.edges):
        conf = dag.edges[(a, b)]
        lines.append(f'  "{dag.names[a]}" -> "{dag.names[b]}" [label="{conf:.4f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_dag(args) -> int:
    if not args.model:
        raise ValueError("--model is required")
    bundle = load_model(args.model)
    if bundle.kind != "triplet":
        raise ValueError(f"expected a triplet model, got {bundle.kind!r}")
    record = parse_pair_file(args.table)
    if record.n_columns < 3:
        raise ValueError(f"{args.table}: DAG recovery needs >= 3 columns")
    data = _standardized_columns(record)
    beliefs = pairwise_beliefs(bundle.forest, data, bundle.basis1d, bundle.basis_joint)
    dag = infer_dag(beliefs)
    out = args.out or "causal_dag.dot"
    write_text_atomic(out, _dag_to_dot(dag))
    print(f"inferred {len(dag.edges)} edges over {dag.d} variables -> {out}")
    return 0


def cmd_check_bounds(args) -> int:
    spec = KernelSpec.single(args.gamma if args.gamma is not None else 0.5)
    seeds = child_seeds(args.seed, 5)
    rows = []

    # Pointwise kernel estimates against the closed form.
    rng = np.random.default_rng(int(seeds[0]))
    basis = draw_rff_basis(spec, 1, args.m, int(seeds[1]))
    zs = rng.normal(0.0, 2.0, size=(args.pairs, 2))
    kdev = max(
        abs(rff_kernel_estimate(z[:1], z[1:], basis) - kernel_value(spec, z[:1], z[1:]))
        for z in zs
    )
    rows.append(("kernel_max_abs_dev", kdev, 0.05, kdev <= 0.05))

    # Embedding reconstruction error against its high-probability bound.
    n_points = 20
    sample = np.random.default_rng(int(seeds[2])).standard_normal((n_points, 1))
    bound = reconstruction_error_bound(spec.c_k, args.m, n_points, delta=0.05)
    trial_seeds = child_seeds(int(seeds[3]), args.trials)
    ok = 0
    for t in range(args.trials):
        tb = draw_rff_basis(spec, 1, args.m, int(trial_seeds[t]))
        err = reconstruction_error_estimate(sample, tb, spec, args.q, int(trial_seeds[t]) ^ 1)
        ok += err <= bound
    frac = ok / args.trials
    rows.append(("recon_error_within_bound_frac", frac, 0.95, frac >= 0.95))

    # Embedding distance reconstruction against the exact kernel oracle.
    mmd_seeds = child_seeds(int(seeds[4]), args.mmd_seeds)
    max_dev = 0.0
    for t in range(args.mmd_seeds):
        r = np.random.default_rng(int(mmd_seeds[t]))
        s = r.standard_normal((50, 1))
        u = r.standard_normal((50, 1)) + r.uniform(-1, 1)
        b = draw_rff_basis(spec, 1, args.m, int(mmd_seeds[t]) ^ 3)
        approx = rff_mmd_sq(embed_sample(s, b), embed_sample(u, b), b)
        dev = abs(approx - exact_mmd(s, u, spec) ** 2)
        max_dev = max(max_dev, dev)
    rows.append(("mmd_sq_max_abs_dev", max_dev, 0.05, max_dev <= 0.05))

    # Convergence rate of the embedding deviation.
    sizes = [int(s) for s in args.sizes.split(",")]
    slope = rate_slope_estimate(args.seed, sizes, args.reps, spec)
    rows.append(("deviation_loglog_slope", slope, "[-0.6,-0.4]", -0.6 <= slope <= -0.4))

    lines = ["check,value,reference,status"]
    for name, value, ref, passed in rows:
        lines.append(f"{name},{float(value)!r},{ref},{'pass' if passed else 'fail'}")
    out = args.out or "bounds_report.csv"
    write_text_atomic(out, "\n".join(lines) + "\n")
    for line in lines[1:]:
        print(line)
    return 0 if all(r[3] for r in rows) else 2


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_seed_value, default=0, help="root random seed (u64)")
    common.add_argument("--m", type=int, default=1000, help="features per embedding block")
    common.add_argument("--n", type=int, default=1000, help="observations per synthetic sample")
    common.add_argument(
        "--big-n", dest="big_n", type=int, default=10000, help="synthetic samples to draw"
    )
    common.add_argument("--out", help="output path")
    common.add_argument("--model", help="model bundle path")
    common.add_argument("--labels", help="labels CSV path (name,label)")

    parser = _Parser(prog="rcckit", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth-pairs", parents=[common], help="write synthetic labeled pairs")
    p.add_argument("--theta", default="3,2,2,2,5", help="generator parameters c,s1,s2,s3,d_f")
    p.add_argument("--theta-file", help="JSON file with generator parameters")
    p.add_argument("--count", type=int, default=10, help="number of pair files")
    p.set_defaults(func=cmd_synth_pairs)

    p = sub.add_parser("synth-triplets", parents=[common], help="write synthetic triplets")
    p.add_argument("--theta", default="3,2,2,2,5")
    p.add_argument("--theta-file")
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_synth_triplets)

    p = sub.add_parser("fit-theta", parents=[common], help="select generator parameters")
    p.add_argument("--data", required=True, help="directory of test pair files")
    p.add_argument("--budget", type=int, default=200, help="random grid candidates to try")
    p.add_argument("--full-sweep", action="store_true", help="search the entire grid")
    p.add_argument("--probe", type=int, default=100, help="synthetic pairs per candidate")
    p.add_argument("--gamma", type=float, help="kernel scale override")
    p.set_defaults(func=cmd_fit_theta)

    for name, fn in (("train-pair", cmd_train_pair), ("train-triplet", cmd_train_triplet)):
        p = sub.add_parser(name, parents=[common], help=f"train the {name.split('-')[1]} model")
        p.add_argument("--theta", default="3,2,2,2,5")
        p.add_argument("--theta-file")
        p.add_argument("--trees", type=int, default=500)
        p.add_argument("--cv", action="store_true", help="pick tree count by cross-validation")
        p.add_argument("--folds", type=int, default=5)
        p.add_argument("--gamma", type=float, help="kernel scale override")
        p.add_argument("--data", help="directory of test files for the kernel scale")
        p.set_defaults(func=fn)

    p = sub.add_parser("score", parents=[common], help="score causal direction of pair files")
    p.add_argument("files", nargs="+", help="pair files to score")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", parents=[common], help="decision-rate evaluation")
    p.add_argument("--data", required=True, help="directory of labeled pair files")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("dag", parents=[common], help="reconstruct a DAG from a data table")
    p.add_argument("table", help="whitespace-column data table (d >= 3 columns)")
    p.set_defaults(func=cmd_dag)

    p = sub.add_parser("check-bounds", parents=[common], help="numerical verification report")
    p.add_argument("--gamma", type=float, help="kernel scale (default 0.5)")
    p.add_argument("--trials", type=int, default=100, help="fresh-basis trials")
    p.add_argument("--q", type=int, default=200, help="Monte-Carlo reference points")
    p.add_argument("--pairs", type=int, default=100, help="kernel estimate test pairs")
    p.add_argument("--mmd-seeds", dest="mmd_seeds", type=int, default=20)
    p.add_argument("--sizes", default="32,64,128,256,512,1024", help="sample sizes")
    p.add_argument("--reps", type=int, default=10, help="repetitions per size")
    p.set_defaults(func=cmd_check_bounds)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ValueError, OSError, ModelFormatError) as e:
        print(f"rcckit: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
