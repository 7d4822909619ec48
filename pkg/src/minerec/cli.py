"""Command-line client.  Every command calls the same core functions as
the HTTP service, so `recommend` here and POST /recommendations agree."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import discovery, explainer, features, petri, quality, recommender, store, xes
from .errors import MinerecError
from .learner import ModelBundle, cross_validate
from .quality import MEASURES
from .recommender import WeightVector


def _read_log(path: str):
    data = Path(path).read_bytes()
    return data, xes.parse_xes(data)


def _weight_options(fn):
    for measure in reversed(MEASURES):
        fn = click.option(f"--{measure}", type=float, default=25.0, show_default=True)(fn)
    return fn


def _emit(obj) -> None:
    click.echo(json.dumps(obj, sort_keys=True, indent=2))


@click.group()
def main():
    """Process discovery recommender."""


@main.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@_weight_options
@click.option("--bundle", "bundle_path", default="bundle.json", show_default=True,
              type=click.Path(exists=True, dir_okay=False))
def recommend(log_path, fitness, precision, generalization, simplicity, bundle_path):
    """Rank the portfolio for a log under the given measure weights."""
    data, log = _read_log(log_path)
    weights = WeightVector(fitness=fitness, precision=precision,
                           generalization=generalization, simplicity=simplicity)
    bundle = ModelBundle.load(bundle_path)
    log_id = store.content_log_id(data)
    rec = recommender.recommend(log, weights, bundle, log_id=log_id)
    _emit({
        "rec_id": store.rec_id_for(log_id, weights, bundle.version),
        "recommendation": rec.to_dict(),
    })


@main.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--algorithm", required=True, type=click.Choice(discovery.PORTFOLIO))
@click.option("--dot", "dot_path", type=click.Path(dir_okay=False), default=None,
              help="Also write GraphViz DOT to this file.")
@click.option("--param", "params", multiple=True,
              help="Algorithm parameter as name=value; repeatable.")
def discover(log_path, algorithm, dot_path, params):
    """Mine a Petri net from a log with one portfolio algorithm."""
    _, log = _read_log(log_path)
    parsed = {}
    for item in params:
        name, _, value = item.partition("=")
        parsed[name] = float(value)
    net = discovery.discover(algorithm, log, parsed or None)
    if dot_path:
        Path(dot_path).write_text(petri.to_dot(net), encoding="utf-8")
    _emit({"algorithm": algorithm, "net": petri.to_json_dict(net)})


@main.command(name="features")
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
def features_cmd(log_path):
    """Print the feature vector of a log."""
    data, log = _read_log(log_path)
    vector = features.extract(log, store.content_log_id(data))
    _emit(json.loads(features.vector_to_json(vector)))


@main.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--algorithm", required=True, type=click.Choice(discovery.PORTFOLIO))
@click.option("--measure", required=True, type=click.Choice(MEASURES))
@click.option("--bundle", "bundle_path", default="bundle.json", show_default=True,
              type=click.Path(exists=True, dir_okay=False))
def explain(log_path, algorithm, measure, bundle_path):
    """Shapley attribution for one (algorithm, measure) prediction."""
    data, log = _read_log(log_path)
    bundle = ModelBundle.load(bundle_path)
    vector = features.extract(log, store.content_log_id(data))
    attribution = explainer.shap_values(bundle.get(algorithm, measure), vector)
    payload = explainer.explanation_payload(attribution, features.feature_catalog())
    payload["algorithm"] = algorithm
    payload["measure"] = measure
    _emit(payload)


@main.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@_weight_options
def evaluate(log_path, fitness, precision, generalization, simplicity):
    """Ground-truth grid: run every miner and measure the actual quality."""
    data, log = _read_log(log_path)
    weights = WeightVector(fitness=fitness, precision=precision,
                           generalization=generalization, simplicity=simplicity)
    rec = recommender.evaluate_ground_truth(log, weights, log_id=store.content_log_id(data))
    _emit(rec.to_dict())


@main.command(name="generate-corpus")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="JSON: config_grid keyword arguments.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def generate_corpus(config_path, out_dir):
    """Generate a labeled corpus of synthetic logs."""
    spec = json.loads(Path(config_path).read_text(encoding="utf-8"))
    configs = corpus_mod.config_grid(
        n_logs=int(spec.get("n_logs", 50)),
        base_seed=int(spec.get("base_seed", 0)),
        noise_levels=tuple(spec.get("noise_levels", [0.0])),
        depth_choices=tuple(tuple(d) for d in spec.get("depth_choices", [[2, 4]])),
        n_activities=tuple(spec.get("n_activities", [5, 15])),
        n_traces=tuple(spec.get("n_traces", [10, 40])),
    )
    built = corpus_mod.build_corpus(configs)
    corpus_mod.save_corpus(built, out_dir)
    n_failed = sum(1 for c in built.cells.values() if c.failed)
    click.echo(f"wrote {len(built.log_ids)} logs to {out_dir} ({n_failed} failed cells)")


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True, file_okay=False),
              required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--n-trees", type=int, default=100, show_default=True)
@click.option("--max-depth", type=int, default=4, show_default=True)
@click.option("--learning-rate", type=float, default=0.1, show_default=True)
@click.option("--min-samples-leaf", type=int, default=3, show_default=True)
@click.option("--prune-threshold", type=float, default=0.95, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def train(corpus_dir, out_path, n_trees, max_depth, learning_rate,
          min_samples_leaf, prune_threshold, seed):
    """Train all 24 regressors from a corpus and write the model bundle."""
    built = corpus_mod.load_corpus(corpus_dir)
    bundle = corpus_mod.train_bundle(
        built,
        prune_threshold=prune_threshold,
        n_trees=n_trees,
        max_depth=max_depth,
        learning_rate=learning_rate,
        min_samples_leaf=min_samples_leaf,
        seed=seed,
    )
    bundle.save(out_path)
    click.echo(f"bundle {bundle.version} -> {out_path} "
               f"({len(bundle.feature_schema)} retained features)")


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True, file_okay=False),
              required=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--n-trees", type=int, default=100, show_default=True)
@click.option("--max-depth", type=int, default=4, show_default=True)
@click.option("--min-samples-leaf", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the full report as JSON.")
def cv(corpus_dir, k, n_trees, max_depth, min_samples_leaf, seed, out_path):
    """k-fold cross-validation of every (algorithm, measure) regressor."""
    built = corpus_mod.load_corpus(corpus_dir)
    report: dict[str, dict] = {}
    for algorithm in discovery.PORTFOLIO:
        for measure in MEASURES:
            data = built.training_dataset(algorithm, measure)
            result = cross_validate(data, k=k, seed=seed, n_trees=n_trees,
                                    max_depth=max_depth,
                                    min_samples_leaf=min_samples_leaf)
            report[f"{algorithm}:{measure}"] = result.to_dict()
            click.echo(
                f"{algorithm:22s} {measure:15s} "
                f"mae={result.mean_mae:.4f} rmse={result.mean_rmse:.4f} "
                f"r2={result.mean_r2:+.3f} baseline_mae={result.mean_baseline_mae:.4f}"
            )
    if out_path:
        Path(out_path).write_text(json.dumps(report, sort_keys=True, indent=2),
                                  encoding="utf-8")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default="./data", show_default=True)
@click.option("--bundle", "bundle_path", default="bundle.json", show_default=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--static-dir", default=None, help="Web UI build to serve at /ui.")
def serve(port, host, data_dir, bundle_path, static_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=data_dir, bundle_path=bundle_path, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


def cli_main():
    try:
        main(standalone_mode=False)
    except MinerecError as exc:
        click.echo(json.dumps({"error": {"code": exc.code, "message": exc.message}}),
                   err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(130)


if __name__ == "__main__":
    cli_main()
