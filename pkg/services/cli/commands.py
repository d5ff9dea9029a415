"""
Command Handlers

Business logic behind every `lab` command. Each handler reads the
resolved ExperimentConfig, reads/writes artifacts under cfg.output_dir
and returns a JSON-ready summary that is also written to
<command>_summary.json. The file set is pinned in docs/OUTPUT_MANIFEST.md.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from services.attacks.deepfool import deepfool
from services.attacks.random_perturbations import induced_feature_norms
from services.attacks.target_confidence import run_target_trials
from services.attacks.uap_hc import uap_hc
from services.core.errors import AlreadyFooled, ArtifactMissing, InvalidConfig
from services.dataset.labeled import LabeledDataset
from services.dataset.splits import split
from services.dataset.synthetic import SynthSpec, generate_synthetic
from services.dataset.wav_loader import load_wav_dir
from services.dominance.detection import dominance_report
from services.dominance.factors import factor_correlations, factors
from services.dominance.fooling import aggregate_fooling_table, per_class_fooling_rate
from services.dominance.reports import (
    fooling_table_frame,
    misclass_frequency_frame,
    per_class_fooling_frame,
    trace_frame,
    write_csv,
    write_gnuplot,
    write_json,
)
from services.dominance.snapshots import clean_predictions, take_snapshot
from services.model.accuracy import accuracy
from services.model.checkpoint import load_checkpoint, save_checkpoint
from services.model.classifier import BaseClassifier, init_classifier
from services.model.training import train
from services.signal.config import Representation
from services.svdlab.decay import decay_report, lambda_table
from services.svdlab.matrices import MatrixKind, build_matrix, compute_deepfool_perturbations
from services.svdlab.sweep import subspace_sweep
from services.svdlab.vector_eval import singular_vector_eval
from services.svdlab.volume_probe import volume_probe
from storage.artifact_storage import load_dataset, load_perturbation, save_dataset, save_perturbation
from .experiment_config import ExperimentConfig, dump_experiment

logger = logging.getLogger(__name__)

CHECKPOINT = Path("model") / "checkpoint.bin"
TRAIN_SET = Path("data") / "train"
TEST_SET = Path("data") / "test"
DOMINANT_VECTORS = 20


def _out(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output_dir)


def _finish(cfg: ExperimentConfig, command: str, summary: Dict) -> Dict:
    summary = {"command": command, "preset": cfg.preset, "seed": cfg.seed, **summary}
    write_json(summary, _out(cfg) / f"{command}_summary.json")
    logger.info(f"✅ {command} finished; summary in {_out(cfg) / f'{command}_summary.json'}")
    return summary


def _load_data(cfg: ExperimentConfig) -> Tuple[LabeledDataset, LabeledDataset]:
    return load_dataset(_out(cfg) / TRAIN_SET), load_dataset(_out(cfg) / TEST_SET)


def _load_model(cfg: ExperimentConfig) -> BaseClassifier:
    path = _out(cfg) / CHECKPOINT
    if not path.exists():
        raise ArtifactMissing(f"checkpoint {path} not found; run `lab train` first", path=str(path))
    model, _ = load_checkpoint(path)
    return model


def _uap_stem(cfg: ExperimentConfig, tag: str, seed: int) -> Path:
    return _out(cfg) / "attacks" / "uap" / tag / f"seed_{seed}"


def _target_stem(cfg: ExperimentConfig, class_name: str, trial: int) -> Path:
    return _out(cfg) / "attacks" / "target" / class_name / f"trial_{trial}"


def _dataset_summary(ds: LabeledDataset) -> Dict:
    return {"size": len(ds), "class_counts": ds.class_counts().tolist(), "digest": ds.digest()}


# ============================================================================
# DATA / TRAIN / EVAL
# ============================================================================

def cmd_gen_data(cfg: ExperimentConfig, workers: int = 1) -> Dict:
    data = cfg.data
    if data.source == "wav":
        if not data.wav_dir:
            raise ArtifactMissing("data.wav_dir is required when data.source is 'wav'")
        full = load_wav_dir(Path(data.wav_dir), data.class_names, cfg.pipeline, split_tag="all")
        train_set, test_set = split(full, 1.0 - data.test_fraction, data.seed)
    else:
        spec = SynthSpec(class_names=data.class_names, per_class=data.train_per_class + data.test_per_class,
                         seed=data.seed, noise_level=data.noise_level)
        full = generate_synthetic(spec, cfg.pipeline, split_tag="all")
        fraction = data.train_per_class / (data.train_per_class + data.test_per_class)
        train_set, test_set = split(full, fraction, data.seed)

    save_dataset(train_set, _out(cfg) / TRAIN_SET)
    save_dataset(test_set, _out(cfg) / TEST_SET)
    write_json(dump_experiment(cfg), _out(cfg) / "experiment.json")
    return _finish(cfg, "gen-data", {
        "source": data.source,
        "class_names": list(data.class_names),
        "train": _dataset_summary(train_set),
        "test": _dataset_summary(test_set),
    })


def cmd_train(cfg: ExperimentConfig, workers: int = 1) -> Dict:
    train_set, _ = _load_data(cfg)
    model = init_classifier(cfg.model.arch, cfg.pipeline, train_set.class_count, cfg.model.seed)
    trained, history = train(model, train_set, cfg.model.train_config())
    digest = save_checkpoint(trained, _out(cfg) / CHECKPOINT, train_set.class_names)
    write_csv(pd.DataFrame({"epoch": np.arange(len(history)), "loss": history}),
              _out(cfg) / "model" / "loss_history.csv")
    report = accuracy(trained, train_set)
    return _finish(cfg, "train", {
        "checkpoint": str(CHECKPOINT),
        "sha256": digest,
        "epochs": cfg.model.epochs,
        "initial_loss": history[0] if history else None,
        "final_loss": history[-1] if history else None,
        "train_accuracy": report.overall,
    })


def cmd_eval(cfg: ExperimentConfig, workers: int = 1) -> Dict:
    model = _load_model(cfg)
    _, test_set = _load_data(cfg)
    report = accuracy(model, test_set)
    write_csv(pd.DataFrame.from_records(report.rows(), columns=["class", "samples", "accuracy_pct"]),
              _out(cfg) / "eval" / "accuracy.csv")
    return _finish(cfg, "eval", {
        "mean_per_class_accuracy": report.mean_per_class,
        "overall_accuracy": report.overall,
        "per_class": {row["class"]: row["accuracy_pct"] for row in report.rows()[:-1]},
    })


# ============================================================================
# ATTACKS
# ============================================================================

def _attack_uap(cfg: ExperimentConfig, model: BaseClassifier, train_set: LabeledDataset) -> Dict:
    uap_train = train_set.take_per_class(cfg.uap.inputs_per_class, cfg.uap.seed)
    runs = []
    for names in cfg.uap.restrictions:
        tag = cfg.restriction_tag(names)
        restricted = [train_set.class_index(name) for name in names]
        for seed in cfg.uap.seeds:
            result = uap_hc(uap_train, model, cfg.uap.uap_config(restricted, seed))
            stem = _uap_stem(cfg, tag, seed)
            digest = save_perturbation(result.perturbation, stem)
            write_csv(trace_frame(result.trace.rows()), stem.parent / f"{stem.name}_trace.csv")
            dominant = result.trace.dominant_class
            runs.append({
                "restriction": tag,
                "seed": seed,
                "artifact": str(stem.relative_to(_out(cfg))),
                "sha256": digest,
                "train_fooling_rate": result.fooling_rate,
                "norm_l2": result.perturbation.norm_l2,
                "accepted_updates": len(result.trace),
                "passes": result.trace.passes_completed,
                "dominant_class": None if dominant is None else train_set.class_names[dominant],
                "triggering_classes": sorted({train_set.class_names[e.triggering_class]
                                              for e in result.trace.entries}),
                "factor_correlations": factor_correlations(result.trace) if dominant is not None else None,
            })
    return {"kind": "uap", "uap_train_size": len(uap_train), "runs": runs}


def _attack_target(cfg: ExperimentConfig, model: BaseClassifier, train_set: LabeledDataset, workers: int) -> Dict:
    names = cfg.target.targets or list(train_set.class_names)
    targets = [train_set.class_index(name) for name in names]
    results = run_target_trials(model, targets, cfg.target.xi, cfg.target.iters, cfg.target.step,
                                cfg.target.trials, cfg.target.seed, workers)
    history_rows, per_target = [], {}
    for index, result in enumerate(results):
        name = train_set.class_names[result.target]
        trial = index % cfg.target.trials
        save_perturbation(result.perturbation, _target_stem(cfg, name, trial))
        history_rows += [{"target": name, "trial": trial, "iteration": i, "best_objective": value}
                         for i, value in enumerate(result.history)]
        entry = per_target.setdefault(name, {"successes": 0, "best_objectives": []})
        entry["successes"] += int(result.success)
        entry["best_objectives"].append(result.best_objective)
    write_csv(pd.DataFrame.from_records(history_rows, columns=["target", "trial", "iteration", "best_objective"]),
              _out(cfg) / "attacks" / "target" / "objective_history.csv")
    return {
        "kind": "target",
        "trials": cfg.target.trials,
        "targets": {name: {"successes": e["successes"], "mean_best_objective": float(np.mean(e["best_objectives"]))}
                    for name, e in per_target.items()},
    }


def _attack_deepfool(cfg: ExperimentConfig, model: BaseClassifier, test_set: LabeledDataset, workers: int) -> Dict:
    subset = test_set.take_per_class(cfg.deepfool.per_class, cfg.deepfool.seed)

    def run(index: int):
        try:
            return index, deepfool(subset.waveforms[index], model, label=int(subset.labels[index]))
        except AlreadyFooled:
            return index, None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(run, range(len(subset))))

    rows = []
    for index, result in outcomes:
        row = {"index": index, "label": subset.class_names[subset.labels[index]], "skipped": result is None}
        if result is not None:
            mfcc_norm = induced_feature_norms(subset.waveforms[index:index + 1], result.perturbation,
                                              Representation.MFCC, model.pipeline)[0]
            row.update({
                "converged": result.converged, "iterations": result.iterations,
                "raw_norm_l2": result.raw_norm, "norm_l2": result.perturbation.norm_l2,
                "mfcc_norm_l2": float(mfcc_norm), "final_class": subset.class_names[result.final_class],
            })
        rows.append(row)
    columns = ["index", "label", "skipped", "converged", "iterations", "raw_norm_l2", "norm_l2",
               "mfcc_norm_l2", "final_class"]
    frame = pd.DataFrame.from_records(rows, columns=columns)
    write_csv(frame, _out(cfg) / "attacks" / "deepfool" / "deepfool.csv")
    done = frame[frame["skipped"] == False]  # noqa: E712
    return {
        "kind": "deepfool",
        "inputs": len(subset),
        "skipped": int(frame["skipped"].sum()),
        "converged": int(done["converged"].sum()) if len(done) else 0,
        "median_norm_l2": float(done["norm_l2"].median()) if len(done) else None,
        "median_mfcc_norm_l2": float(done["mfcc_norm_l2"].median()) if len(done) else None,
    }


def cmd_attack(cfg: ExperimentConfig, kind: str, workers: int = 1) -> Dict:
    model = _load_model(cfg)
    train_set, test_set = _load_data(cfg)
    if kind == "uap":
        summary = _attack_uap(cfg, model, train_set)
    elif kind == "target":
        summary = _attack_target(cfg, model, train_set, workers)
    elif kind == "deepfool":
        summary = _attack_deepfool(cfg, model, test_set, workers)
    else:
        raise ValueError(f"unknown attack kind '{kind}'")
    return _finish(cfg, f"attack-{kind}", summary)


# ============================================================================
# DOMINANCE
# ============================================================================

def _uap_artifacts(cfg: ExperimentConfig) -> List[Tuple[str, int, Path]]:
    found = []
    for names in cfg.uap.restrictions:
        tag = cfg.restriction_tag(names)
        for seed in cfg.uap.seeds:
            stem = _uap_stem(cfg, tag, seed)
            if stem.with_suffix(".json").exists():
                found.append((tag, seed, stem))
    return found


def _target_artifacts(cfg: ExperimentConfig, class_names) -> List[Tuple[str, int, Path]]:
    found = []
    for name in cfg.target.targets or list(class_names):
        for trial in range(cfg.target.trials):
            stem = _target_stem(cfg, name, trial)
            if stem.with_suffix(".json").exists():
                found.append((name, trial, stem))
    return found


def _names(class_names, indices) -> str:
    return "+".join(class_names[i] for i in indices)


def cmd_dominance(cfg: ExperimentConfig, workers: int = 1) -> Dict:
    model = _load_model(cfg)
    _, test_set = _load_data(cfg)
    names = test_set.class_names
    dom = cfg.dominance
    clean = clean_predictions(model, test_set)

    artifacts = _uap_artifacts(cfg)
    if not artifacts:
        raise ArtifactMissing("no UAP artifacts found; run `lab attack --kind uap` first")

    p_rows, class_fr_rows, records, reports = [], [], [], []
    variants_by_tag: Dict[str, List[Dict]] = {}
    for tag, seed, stem in artifacts:
        v = load_perturbation(stem)
        snap = take_snapshot(model, test_set, v, clean)
        report = dominance_report(snap, dom.alpha, dom.beta, dom.zeta, dom.only_correct, dom.estimator)
        f = factors(model, test_set, v, clean=clean)
        p_rows.append(report.p)
        class_fr_rows.append(per_class_fooling_rate(snap, dom.only_correct))
        variants_by_tag.setdefault(tag, []).append(report.fooling_rates)
        reports.append({"restriction": tag, "seed": seed, **report.to_dict(), "factors": f.to_dict()})
        records.append({
            "restriction": tag, "seed": seed,
            **{f"fr_{k}": v_ for k, v_ in report.fooling_rates.items()},
            "dominant_by_mass": _names(names, report.dominant_by_mass),
            "dominant_by_attraction": _names(names, report.dominant_by_attraction),
            "F1": f.f1, "F2": f.f2, "F3": f.f3, "y_b": names[f.y_b],
        })

    out = _out(cfg) / "dominance"
    write_csv(misclass_frequency_frame(p_rows, names), out / "misclass_frequencies.csv")
    write_csv(per_class_fooling_frame(class_fr_rows, names), out / "per_class_fooling.csv")
    write_csv(pd.DataFrame.from_records(records), out / "perturbations.csv")
    tables = {tag: aggregate_fooling_table(rows) for tag, rows in variants_by_tag.items()}
    write_csv(fooling_table_frame(tables, key="restriction"), out / "fooling_table.csv")
    write_json(reports, out / "reports.json")

    summary = {
        "rows": [{"restriction": tag, "seed": seed} for tag, seed, _ in artifacts],
        "fooling_table": tables,
        "dominant_found": {f"{r['restriction']}/{r['seed']}": bool(r["dominant_by_mass"] or r["dominant_by_attraction"])
                           for r in reports},
    }

    targets = _target_artifacts(cfg, names)
    if targets:
        summary["target_table"] = _target_dominance(cfg, model, test_set, clean, targets, out)
    return _finish(cfg, "dominance", summary)


def _target_dominance(cfg, model, test_set, clean, targets, out: Path) -> Dict:
    names = test_set.class_names
    dom = cfg.dominance
    by_target: Dict[str, Dict] = {}
    for name, _, stem in targets:
        v = load_perturbation(stem)
        snap = take_snapshot(model, test_set, v, clean)
        report = dominance_report(snap, dom.alpha, dom.beta, dom.zeta, dom.only_correct, dom.estimator)
        entry = by_target.setdefault(name, {"rates": [], "p": [], "successes": 0})
        entry["rates"].append(report.fooling_rates)
        entry["p"].append(report.p)
        entry["successes"] += int(model.predict(v.values) == names.index(name))

    tables = {name: aggregate_fooling_table(e["rates"]) for name, e in by_target.items()}
    frame = fooling_table_frame(tables, key="target")
    frame["successes"] = [by_target[name]["successes"] for name in tables]
    frame["trials"] = [len(by_target[name]["rates"]) for name in tables]
    write_csv(frame, out / "target_fooling_table.csv")
    write_csv(misclass_frequency_frame([np.mean(e["p"], axis=0) for e in by_target.values()], names),
              out / "target_misclass_frequencies.csv")
    return {"targets": list(by_target), "fooling_table": tables,
            "successes": {name: e["successes"] for name, e in by_target.items()}}


# ============================================================================
# SVD
# ============================================================================

MATRIX_SET = (
    (MatrixKind.DEEPFOOL_V, Representation.WAVEFORM),
    (MatrixKind.RANDOM_R, Representation.WAVEFORM),
    (MatrixKind.DEEPFOOL_V, Representation.SPEC),
    (MatrixKind.RANDOM_R, Representation.SPEC),
    (MatrixKind.UNIFORM_FEATURE, Representation.SPEC),
    (MatrixKind.DEEPFOOL_V, Representation.MFCC),
    (MatrixKind.RANDOM_R, Representation.MFCC),
    (MatrixKind.UNIFORM_FEATURE, Representation.MFCC),
)


def cmd_svd(cfg: ExperimentConfig, workers: int = 1) -> Dict:
    model = _load_model(cfg)
    train_set, test_set = _load_data(cfg)
    svd_cfg = cfg.svd
    out = _out(cfg) / "svd"

    matrix_set = train_set.take_per_class(svd_cfg.matrix_per_class, svd_cfg.seed)
    batch = compute_deepfool_perturbations(matrix_set, model, workers)
    matrices = [
        build_matrix(matrix_set, model, kind, rep, cfg.pipeline, svd_cfg.seed,
                     deepfool_batch=batch, random_l2=svd_cfg.random_l2, workers=workers)
        for kind, rep in MATRIX_SET
    ]
    entries = decay_report(matrices)
    write_csv(pd.DataFrame.from_records([e.to_dict() for e in entries]), out / "decay.csv")
    for entry in entries:
        x, y = entry.scaled_series()
        write_gnuplot(pd.DataFrame({"x": x, "sigma_scaled": y, "fit": entry.fit.predict(x)}),
                      out / f"sigma_{entry.name}.dat")
    lambdas = lambda_table(entries)

    by_name = {e.name: e for e in entries}
    bases = {"deepfool": by_name["deepfool_MFCC"].svd.V, "random": by_name["random_MFCC"].svd.V}
    available = min(V.shape[1] for V in bases.values())
    ns = [n for n in svd_cfg.ns if n <= available]
    if len(ns) < len(svd_cfg.ns):
        logger.warning(f"⚠️ Dropping subspace sizes above {available}: {[n for n in svd_cfg.ns if n > available]}")
    if not ns:
        raise InvalidConfig(f"every subspace size in svd.ns exceeds the {available} available singular vectors")

    clean = clean_predictions(model, test_set)
    sweeps = {name: subspace_sweep(model, test_set, V, ns, svd_cfg.scales, svd_cfg.trials,
                                   svd_cfg.seed, workers, clean=clean)
              for name, V in bases.items()}
    sweep_rows = [{"basis": name, **row} for name, result in sweeps.items() for row in result.rows()]
    write_csv(pd.DataFrame.from_records(sweep_rows, columns=["basis", "N", "scale", "fooling_rate"]),
              out / "sweep.csv")
    for name, result in sweeps.items():
        write_gnuplot(pd.DataFrame.from_records(result.rows()), out / f"sweep_{name}.dat")

    count = min(svd_cfg.vector_count, available)
    evals = {"deepfool": singular_vector_eval(model, test_set, bases["deepfool"], count,
                                              svd_cfg.vector_scales, clean=clean)}
    pair = evals["deepfool"].dominant_pair
    evals["random"] = singular_vector_eval(model, test_set, bases["random"], count, svd_cfg.vector_scales,
                                           dominant_pair=pair, clean=clean)
    for name, result in evals.items():
        frame = pd.DataFrame.from_records(result.rows(test_set.class_names))
        write_csv(frame, out / f"vectors_{name}.csv")
        write_gnuplot(frame, out / f"vectors_{name}.dat")

    probe = volume_probe(model, svd_cfg.volume_samples, svd_cfg.seed)
    write_csv(pd.DataFrame({"class": list(test_set.class_names), "count": probe.counts}),
              out / "volume_probe.csv")

    head = min(DOMINANT_VECTORS, count)
    mass = {name: float(np.mean(result.dominant_mass()[:head])) for name, result in evals.items()}
    small_n = ns[0] if ns else None
    sweep_small = ({name: float(np.mean(result.fooling_rates[0])) for name, result in sweeps.items()}
                   if small_n is not None else {})
    return _finish(cfg, "svd", {
        "matrix_rows": {e.name: int(e.matrix.rows.shape[0]) for e in entries},
        "deepfool_skipped": len(batch.skipped),
        "lambdas": lambdas,
        "checks": {
            "lambda_deepfool_gt_uniform_mfcc": lambdas["deepfool_MFCC"] > lambdas["uniform_MFCC"],
            "sweep_small_n": small_n,
            "sweep_small_n_fooling_rate": sweep_small,
            "sweep_deepfool_gt_random": bool(sweep_small and sweep_small["deepfool"] > sweep_small["random"]),
            "dominant_pair": [test_set.class_names[i] for i in pair],
            "dominant_mass_first_vectors": mass,
            "dominant_mass_deepfool_gt_random": mass["deepfool"] > mass["random"],
        },
        "volume_probe": probe.to_dict(test_set.class_names),
    })
