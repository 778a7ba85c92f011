"""End-to-end fault localization run: data -> augmentation -> denoising ->
embedding -> boosted classification -> reports, plus ablation variants."""

from __future__ import annotations

import contextlib
import enum
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import boosting, dataset, lle, metrics, synthgen, wavelet
from .boosting import BoostConfig, CategoryWeightMode, MulticlassMode
from .config import PipelineConfig, dump_config
from .neuralkit.gan import generate_samples, save_saegan, train_saegan
from .neuralkit.net import build_cnn, build_fcn, train_classifier

log = logging.getLogger(__name__)

LEAKAGE_NOTE = ("LLE is fitted transductively on training pool and test features together; "
                "test features influence the embedding (labels are never used).")


class Variant(enum.Enum):
    FULL = "full"
    NO_SG = "no_sg"  # no generative augmentation
    NO_W = "no_w"  # soft-only wavelet thresholding
    NO_M = "no_m"  # PCA instead of LLE
    NO_B = "no_b"  # plain AdaBoost without category weights


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage name attached
        raise PipelineError(name, exc) from exc


@dataclass
class PipelineResult:
    reports: list
    baselines: dict = field(default_factory=dict)
    selected: dict = field(default_factory=dict)
    selection_scores: list = field(default_factory=list)
    pool_counts: list = field(default_factory=list)
    test_size: int = 0
    shapes: list = field(default_factory=list)


_STAGE_IDS = {"split": 1, "gan": 2, "generate": 3, "boost": 4, "select": 5, "single": 6}


def derive_seed(master: int, stage: str, *parts: int) -> int:
    ss = np.random.SeedSequence([int(master), _STAGE_IDS[stage], *map(int, parts)])
    return int(ss.generate_state(1)[0])


# ---------------------------------------------------------------- data stages

def load_raw(cfg: PipelineConfig, data_path=None):
    if data_path is not None:
        return dataset.read_csv(data_path)
    return synthgen.generate_dataset(cfg.synth)


def prepare(raw, cfg: PipelineConfig) -> dataset.Dataset:
    """Fuse paired fields, subsample every ``stride``-th value, min-max normalize."""
    fused = [dataset.FusedSample(s.label, dataset.interval_sample(s.features, cfg.stride))
             for s in dataset.fuse_by_index(raw)]
    return dataset.normalize_minmax(dataset.Dataset.from_samples(fused))


def fit_augmenters(train: dataset.Dataset, cfg: PipelineConfig) -> dict:
    """One SAE-GAN per class, fitted on that class's training rows only."""
    if np.any(train.provenance != "train"):
        raise AssertionError("augmenters may only see training samples")
    models = {}
    for c in range(train.num_classes):
        rows = train.features[train.labels == c]
        if rows.shape[0] == 0:
            continue
        seed = derive_seed(cfg.seed, "gan", c)
        gan_cfg = replace(cfg.gan,
                          sae_train=replace(cfg.gan.sae_train, seed=seed % 2**31),
                          gan_train=replace(cfg.gan.gan_train, seed=(seed + 1) % 2**31))
        models[c] = train_saegan(rows, gan_cfg)
    return models


def augment(train: dataset.Dataset, models: dict, target: int, seed: int) -> dataset.Dataset:
    """Top every class up to ``target`` rows with generated samples."""
    pool = train
    for c, model in sorted(models.items()):
        missing = target - int(np.sum(train.labels == c))
        if missing < 0:
            raise ValueError(f"class {c} already has more than {target} samples")
        gen = generate_samples(model, missing, derive_seed(seed, "generate", c))
        pool = pool.concat(dataset.Dataset(gen, np.full(missing, c), train.num_classes,
                                           np.full(missing, "generated", dtype=object)))
    return pool


def reduce_features(pool_x, test_x, variant: Variant, lle_cfg: lle.LleConfig):
    """Embed pool and test rows; returns standardized ``(pool, test)`` features."""
    if variant is Variant.NO_M:
        z_pool = lle.pca_reduce(pool_x, lle_cfg.target_dim)
        z_test = lle.pca_reduce(test_x, lle_cfg.target_dim, fit_points=pool_x)
    else:
        z = lle.lle_reduce(np.vstack([pool_x, test_x]), lle_cfg)
        z_pool, z_test = z[:len(pool_x)], z[len(pool_x):]
    mean = z_pool.mean(axis=0)
    std = z_pool.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (z_pool - mean) / std, (z_test - mean) / std


def preprocess(pool: dataset.Dataset, test: dataset.Dataset, cfg: PipelineConfig,
               point: dict, variant: Variant):
    """Denoise every row and reduce dimension for one parameter point."""
    w_hard = 0.0 if variant is Variant.NO_W else point["w_hard"]
    plan = wavelet.ThresholdPlan(w_hard, 1.0 - w_hard, point["fixed_lambda"])
    den_pool = wavelet.denoise_rows(pool.features, cfg.wavelet.filter, cfg.wavelet.levels, plan)
    den_test = wavelet.denoise_rows(test.features, cfg.wavelet.filter, cfg.wavelet.levels, plan)
    lle_cfg = replace(cfg.lle, k_neighbors=point["k_neighbors"])
    return reduce_features(den_pool, den_test, variant, lle_cfg)


def boost_config(cfg: PipelineConfig, variant: Variant, seed: int) -> BoostConfig:
    bc = replace(cfg.boost, weak=replace(cfg.boost.weak, seed=seed % 2**31))
    if variant is Variant.NO_B:
        bc = replace(bc, category_weights=CategoryWeightMode.OFF,
                     multiclass_mode=MulticlassMode.SAMME)
    return bc


# ---------------------------------------------------------- model selection

def select_parameters(pool: dataset.Dataset, test: dataset.Dataset, cfg: PipelineConfig,
                      variant: Variant):
    """Exhaustive grid search scored by mean k-fold validation accuracy."""
    points = list(cfg.grid.points())
    smallest = int(pool.class_counts()[pool.class_counts() > 0].min())
    k = min(cfg.k_folds, smallest)
    if k < 2:
        raise ValueError("k-fold selection needs at least 2 samples per class")
    if k != cfg.k_folds:
        log.warning("k-fold reduced from %d to %d (smallest class has %d samples)",
                    cfg.k_folds, k, smallest)
    scores = []
    for i, point in enumerate(points):
        x_pool, _ = preprocess(pool, test, cfg, point, variant)
        ordered = dataset.interleave_by_class(pool.with_features(x_pool))
        accs = []
        for f, (tr, va) in enumerate(dataset.kfold(ordered, k)):
            bc = boost_config(cfg, variant, derive_seed(cfg.seed, "select", i, f))
            ens = boosting.train_adaboost(tr.features, tr.labels, bc, tr.num_classes)
            accs.append(float(np.mean(ens.predict(va.features) == va.labels)))
        scores.append(float(np.mean(accs)))
        log.info("grid point %s: mean validation accuracy %.4f", point, scores[-1])
    best = int(np.argmax(scores))
    return points[best], scores


# ---------------------------------------------------------------- the run

def run_pipeline(cfg: PipelineConfig | None = None, data_path=None, out_dir=None,
                 variant: Variant | str = Variant.FULL, baselines: bool = False,
                 save_models: bool = False) -> PipelineResult:
    """Execute the whole method once with ``cfg.repeats`` evaluation repeats.

    The train/test split is fixed; repeats vary the generation noise and the
    weak-learner seeds. With ``baselines`` a lone CNN and a lone FCN are also
    trained on each repeat's preprocessed pool.
    """
    cfg = cfg or PipelineConfig()
    cfg.validate()
    variant = Variant(variant)
    config_text = dump_config(cfg)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    result = PipelineResult(reports=[])

    def shape(name, *arrays):
        result.shapes.append((name, [tuple(a.shape) for a in arrays]))
        log.info("%s: %s", name, [tuple(a.shape) for a in arrays])

    with _stage("load"):
        raw = load_raw(cfg, data_path)
    with _stage("fuse"):
        data = prepare(raw, cfg)
        shape("fused", data.features)
    with _stage("split"):
        train, test = dataset.split_train_test(data, cfg.train_fraction,
                                               derive_seed(cfg.seed, "split"))
        train.provenance[:] = "train"
        test.provenance[:] = "test"
        result.test_size = len(test)
        shape("split", train.features, test.features)
    models = {}
    if variant is not Variant.NO_SG:
        with _stage("augment-fit"):
            models = fit_augmenters(train, cfg)
            if save_models and out is not None:
                for c, m in models.items():
                    save_saegan(m, out / f"saegan_class{c}.sgwm")

    def make_pool(repeat: int) -> dataset.Dataset:
        if variant is Variant.NO_SG:
            return train
        with _stage("augment"):
            return augment(train, models, cfg.target_per_class,
                           derive_seed(cfg.seed, "generate", repeat))

    with _stage("select"):
        pool0 = make_pool(0)
        result.selected, result.selection_scores = select_parameters(pool0, test, cfg, variant)

    reports = []
    baseline_reports = {"cnn": [], "fcn": []}
    k = data.num_classes
    for r in range(cfg.repeats):
        pool = pool0 if r == 0 else make_pool(r)
        if np.any(pool.provenance == "test"):
            raise AssertionError("test samples leaked into the training pool")
        result.pool_counts.append(pool.class_counts().tolist())
        with _stage("preprocess"):
            x_pool, x_test = preprocess(pool, test, cfg, result.selected, variant)
            shape(f"repeat {r} features", x_pool, x_test)
        run_seed = derive_seed(cfg.seed, "boost", r)
        with _stage("boost"):
            ens = boosting.train_adaboost(x_pool, pool.labels,
                                          boost_config(cfg, variant, run_seed), k)
            if save_models and out is not None:
                boosting.save_ensemble(ens, out / f"ensemble_{variant.value}_{r}.sgwm")
        with _stage("evaluate"):
            rep = metrics.evaluate(ens.predict(x_test), test.labels, k, seed=run_seed,
                                   config=config_text, variant=variant.value)
            rep.notes = [LEAKAGE_NOTE] if variant is not Variant.NO_M else []
            rep.notes.append(f"selected parameters: {result.selected}")
            reports.append(rep)
            if out is not None:
                rep.write(out / f"report_{variant.value}_{r}.json")
        if baselines:
            with _stage("baselines"):
                for name, builder, offset in (("cnn", build_cnn, 0), ("fcn", build_fcn, 1)):
                    seed = derive_seed(cfg.seed, "single", r, offset) % 2**31
                    net = builder(x_pool.shape[1], k, np.random.default_rng(seed))
                    train_classifier(net, x_pool, pool.labels, replace(cfg.boost.weak, seed=seed))
                    brep = metrics.evaluate(np.argmax(net.forward(x_test), axis=1), test.labels,
                                            k, seed=seed, config=config_text, variant=name)
                    baseline_reports[name].append(brep)
                    if out is not None:
                        brep.write(out / f"report_{name}_{r}.json")
    result.reports = reports
    if baselines:
        result.baselines = baseline_reports
    return result


def ablate(cfg: PipelineConfig | None = None, variant: Variant | str = Variant.FULL,
           data_path=None, out_dir=None) -> PipelineResult:
    """Run one ablation arm; ``full`` is the unmodified pipeline."""
    return run_pipeline(cfg, data_path, out_dir, Variant(variant))


pca_reduce = lle.pca_reduce
