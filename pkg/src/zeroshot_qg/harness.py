"""End-to-end experiment orchestration.

Pipeline: prepare annotated samples -> train TransE -> build zero-shot
folds -> per (fold, system) train/index and generate -> score -> write the
tab-separated report, a machine-readable JSON report and figures. Every
step is deterministic given (config, seed): reruns produce byte-identical
artifacts.
"""

import json
import logging
from pathlib import Path

import numpy as np

from . import plotting
from .baselines import TfidfLsaIndex, TransEIndex, ir_query_tokens, select_baseline
from .contexts import (
    read_dep_paths,
    read_first_sentences,
    read_labels,
    read_sentences,
    read_types,
)
from .dataset import (
    build_fold_vocabulary,
    encode_sample,
    encode_samples,
    prepare_samples,
    question_tokens_for,
    read_dataset,
    read_question_records,
    realize_tokens,
    write_dataset,
)
from .errors import ConfigError, DomainError
from .expconfig import ALL_SYSTEMS
from .folds import Fold, make_folds
from .kb import TranseConfig, TransEModel, read_triples, transe_train
from .metrics import METRIC_NAMES, ScoreReport, score_fold
from .model import ModelConfig, QGModel, TrainConfig, load_pretrained_words
from .textproc import tokenize

log = logging.getLogger(__name__)

# (use_contexts, use_copy) per neural system
NEURAL_VARIANTS = {
    "encoder_decoder": (False, False),
    "context_qg": (True, False),
    "context_qg_copy": (True, True),
}
# use_copy per retrieval system with an index
RETRIEVAL_COPY = {"r_transe": False, "r_transe_copy": True,
                  "ir": False, "ir_copy": True}

HUMAN_EVAL_RUBRIC = (
    "# Rate each system output for naturalness on a 1-5 scale:",
    "#   5 = perfectly clear and natural",
    "#   3 = artificial but understandable",
    "#   1 = completely not understandable",
    "# Also mark whether the question expresses the fact's predicate.",
)


def derive_seed(*parts):
    """Stable child seed from integer parts."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, dtype=np.uint32)[0])


class Experiment:
    def __init__(self, config):
        self.config = config
        self.out_dir = Path(config.out_dir)
        self._samples = None
        self._folds = None
        self._transe = None
        self._labels = None

    # ------------------------------------------------------------- paths

    def path(self, *parts):
        target = self.out_dir.joinpath(*parts)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def transe_path(self):
        return self.path("checkpoints", "transe.ckpt")

    def system_ckpt(self, system, fold_id):
        return self.path("checkpoints", f"{system}_fold{fold_id}.ckpt")

    def generations_path(self, system, fold_id):
        return self.path("generations", f"fold{fold_id}_{system}.tsv")

    # ------------------------------------------------------------ loading

    @property
    def samples(self):
        if self._samples is None:
            dataset = Path(self.config.dataset)
            if not dataset.exists():
                raise ConfigError(f"dataset not prepared yet: {dataset}")
            self._samples = read_dataset(dataset)
        return self._samples

    @property
    def folds(self):
        if self._folds is None:
            path = self.path("folds.json")
            if not path.exists():
                raise ConfigError(f"folds not built yet: {path}")
            data = json.loads(path.read_text(encoding="utf-8"))
            self._folds = [Fold.from_jsonable(f) for f in data["folds"]]
        return self._folds

    @property
    def transe(self):
        if self._transe is None:
            path = self.transe_path()
            if not path.exists():
                raise ConfigError(f"TransE embeddings not trained yet: {path}")
            self._transe = TransEModel.load(path)
        return self._transe

    @property
    def labels(self):
        if self._labels is None:
            self.config.require("labels")
            self._labels = read_labels(self.config.labels)
        return self._labels

    # -------------------------------------------------------------- steps

    def prepare_contexts(self):
        """Mine contexts and write the annotated dataset JSONL."""
        cfg = self.config
        cfg.require("questions", "labels", "types", "sentences", "first_sentences")
        dep = read_dep_paths(cfg.dep_paths) if cfg.dep_paths else None
        samples = prepare_samples(
            read_question_records(cfg.questions),
            read_labels(cfg.labels),
            read_types(cfg.types),
            read_sentences(cfg.sentences),
            read_first_sentences(cfg.first_sentences),
            dep_paths=dep,
        )
        dataset = Path(cfg.dataset)
        dataset.parent.mkdir(parents=True, exist_ok=True)
        write_dataset(dataset, samples)
        self._samples = samples
        log.info("prepared %d samples -> %s", len(samples), dataset)
        return samples

    def train_transe(self):
        cfg = self.config
        cfg.require("triples")
        triples = read_triples(cfg.triples)
        transe_cfg = TranseConfig(dim=cfg.kb_dim, margin=cfg.transe_margin,
                                  epochs=cfg.transe_epochs,
                                  learning_rate=cfg.transe_lr,
                                  seed=derive_seed(cfg.seed, 101))
        model, losses = transe_train(triples, transe_cfg)
        model.save(self.transe_path(), extra_meta={"losses": losses})
        self._transe = model
        log.info("trained TransE on %d triples -> %s", len(triples), self.transe_path())
        return model

    def make_folds(self):
        cfg = self.config
        folds = make_folds(self.samples, cfg.key_kind, min_group=cfg.min_group,
                           ratios=cfg.ratios(), n_folds=cfg.n_folds, seed=cfg.seed)
        payload = {
            "key_kind": cfg.key_kind, "seed": cfg.seed, "n_folds": cfg.n_folds,
            "min_group": cfg.min_group, "ratios": list(cfg.ratios()),
            "folds": [f.to_jsonable() for f in folds],
        }
        path = self.path("folds.json")
        path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n",
                        encoding="utf-8")
        self._folds = folds
        log.info("built %d folds over key %s -> %s", len(folds), cfg.key_kind, path)
        return folds

    def _fold(self, fold_id):
        try:
            return self.folds[fold_id]
        except IndexError:
            raise ConfigError(f"no fold {fold_id}; have {len(self.folds)}") from None

    def train_system(self, system, fold_id):
        """Train a neural system or build a retrieval index for one fold."""
        if system not in ALL_SYSTEMS:
            raise ConfigError(f"unknown system {system!r}")
        fold = self._fold(fold_id)
        train_samples = [self.samples[i] for i in fold.train]
        if not train_samples:
            raise DomainError(f"fold {fold_id} has an empty training split")

        if system == "select":
            return None  # scans the training fold at query time
        if system in RETRIEVAL_COPY:
            use_copy = RETRIEVAL_COPY[system]
            if system.startswith("r_transe"):
                index = TransEIndex.build(train_samples, self.transe, sample_ids=fold.train)
            else:
                docs = [question_tokens_for(s, use_copy) for s in train_samples]
                index = TfidfLsaIndex.build(docs, sample_ids=fold.train)
            path = self.system_ckpt(system, fold_id)
            index.save(path)
            log.info("built %s index for fold %d -> %s", system, fold_id, path)
            return path

        use_contexts, use_copy = NEURAL_VARIANTS[system]
        cfg = self.config
        vocab = build_fold_vocabulary(train_samples, cfg.vocab_size, use_copy,
                                      include_contexts=use_contexts)
        model_cfg = ModelConfig(
            kb_dim=cfg.kb_dim, ctx_dim=cfg.ctx_dim, dec_dim=cfg.dec_dim,
            word_dim=cfg.word_dim, vocab_size=cfg.vocab_size,
            max_decode_len=cfg.max_decode_len, beam_width=cfg.beam,
            seed=derive_seed(cfg.seed, fold_id, ALL_SYSTEMS.index(system)),
            use_contexts=use_contexts)
        pretrained = (load_pretrained_words(cfg.word_vectors, cfg.word_dim)
                      if cfg.word_vectors else None)
        model = QGModel(model_cfg, vocab, self.transe, pretrained_words=pretrained)

        enc_train = encode_samples(train_samples, vocab, self.transe, use_copy)
        valid_samples = [self.samples[i] for i in fold.valid]
        enc_valid = (encode_samples(valid_samples, vocab, self.transe, use_copy)
                     if valid_samples else None)
        train_cfg = TrainConfig(
            epochs=cfg.epochs, batch_size=cfg.batch_size,
            learning_rate=cfg.learning_rate, lr_decay=cfg.lr_decay,
            min_learning_rate=cfg.min_learning_rate, grad_clip=cfg.grad_clip,
            seed=derive_seed(cfg.seed, fold_id, ALL_SYSTEMS.index(system), 1),
            select_by_valid_bleu=enc_valid is not None)
        history = model.train(enc_train, enc_valid, train_cfg)

        path = self.system_ckpt(system, fold_id)
        model.save(path)
        history_payload = [
            {"epoch": h.epoch, "train_loss": h.train_loss, "valid_loss": h.valid_loss,
             "valid_bleu4": h.valid_bleu4, "learning_rate": h.learning_rate}
            for h in history]
        self.path("checkpoints", f"{system}_fold{fold_id}_history.json").write_text(
            json.dumps(history_payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        plotting.plot_loss_curves(
            {f"{system} fold {fold_id}": history},
            self.path("figures", f"loss_{system}_fold{fold_id}.png"))
        log.info("trained %s on fold %d (%d samples) -> %s",
                 system, fold_id, len(train_samples), path)
        return path

    # ---------------------------------------------------------- generation

    def _generate_neural(self, system, fold, beam):
        model = QGModel.load(self.system_ckpt(system, fold.fold_id), self.transe)
        _, use_copy = NEURAL_VARIANTS[system]
        rows = []
        dropped_total = 0
        for i in fold.test:
            sample = self.samples[i]
            enc = encode_sample(sample, model.vocab, self.transe, use_copy)
            result = model.generate(enc, beam_width=beam)
            realized, dropped = realize_tokens(result.tokens, sample, self.labels)
            dropped_total += dropped
            rows.append((i, realized))
        return rows, {"dropped_copy_tokens": dropped_total}

    def _generate_retrieval(self, system, fold, beam):
        del beam  # retrieval output does not depend on the beam width
        cfg = self.config
        train_samples = [self.samples[i] for i in fold.train]
        index = None
        if system in RETRIEVAL_COPY:
            cls = TransEIndex if system.startswith("r_transe") else TfidfLsaIndex
            index = cls.load(self.system_ckpt(system, fold.fold_id))
        rows = []
        stats = {"dropped_copy_tokens": 0, "ir_fallbacks": 0}
        for i in fold.test:
            sample = self.samples[i]
            if system == "select":
                pos = select_baseline(sample, train_samples, cfg.key_kind,
                                      derive_seed(cfg.seed, fold.fold_id, i))
                retrieved = train_samples[pos]
                use_copy = False
            elif system.startswith("r_transe"):
                use_copy = RETRIEVAL_COPY[system]
                pos = index.retrieve(sample, self.transe)
                retrieved = self.samples[index.sample_ids[pos]]
            else:  # ir / ir_copy
                use_copy = RETRIEVAL_COPY[system]
                pos, flagged = index.retrieve(ir_query_tokens(sample, use_copy))
                stats["ir_fallbacks"] += int(flagged)
                retrieved = self.samples[index.sample_ids[pos]]
            tokens = question_tokens_for(retrieved, use_copy)
            realized, dropped = realize_tokens(tokens, sample, self.labels)
            stats["dropped_copy_tokens"] += dropped
            rows.append((i, realized))
        return rows, stats

    def generate(self, system, fold_id, beam=None):
        """Write one generations TSV: sample_id, generated, reference."""
        fold = self._fold(fold_id)
        beam = beam or self.config.beam
        if system in NEURAL_VARIANTS:
            rows, stats = self._generate_neural(system, fold, beam)
        else:
            rows, stats = self._generate_retrieval(system, fold, beam)
        path = self.generations_path(system, fold_id)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sample_id\tgenerated\treference\n")
            for i, tokens in rows:
                fh.write(f"{i}\t{' '.join(tokens)}\t{self.samples[i].question}\n")
        stats_path = self.path("generations", f"fold{fold_id}_{system}.stats.json")
        stats_path.write_text(json.dumps(stats, sort_keys=True) + "\n", encoding="utf-8")
        log.info("generated %d questions with %s on fold %d", len(rows), system, fold_id)
        return path

    # ---------------------------------------------------------- evaluation

    def read_generations(self, system, fold_id):
        path = self.generations_path(system, fold_id)
        if not path.exists():
            raise ConfigError(f"no generations for {system} fold {fold_id}: {path}")
        rows = []
        with open(path, encoding="utf-8") as fh:
            next(fh)  # header
            for line in fh:
                sample_id, generated, reference = line.rstrip("\n").split("\t")
                rows.append((int(sample_id), generated.split() if generated else [],
                             tokenize(reference)))
        return rows

    def evaluate(self, systems=None, fold_ids=None):
        """Score all requested (system, fold) pairs and write the report."""
        systems = systems or self.config.system_list()
        fold_ids = fold_ids if fold_ids is not None else range(len(self.folds))
        reports = {}
        for system in systems:
            report = ScoreReport(system=system)
            for fold_id in fold_ids:
                rows = self.read_generations(system, fold_id)
                candidates = [r[1] for r in rows]
                references = [r[2] for r in rows]
                report.add_fold(score_fold(candidates, references))
            reports[system] = report
        return self.write_report(reports)

    def write_report(self, reports):
        aggregates = {system: report.aggregate() for system, report in reports.items()}
        tsv = self.path("report.tsv")
        with open(tsv, "w", encoding="utf-8") as fh:
            fh.write("model\t" + "\t".join(METRIC_NAMES) + "\n")
            for system, agg in aggregates.items():
                cells = [f"{mean * 100:.2f} ± {std * 100:.2f}"
                         for mean, std in (agg[m] for m in METRIC_NAMES)]
                fh.write(system + "\t" + "\t".join(cells) + "\n")
        payload = {
            "config": self.config.to_jsonable(),
            "systems": {
                system: {
                    "folds": report.fold_scores,
                    "mean": {m: aggregates[system][m][0] for m in METRIC_NAMES},
                    "std": {m: aggregates[system][m][1] for m in METRIC_NAMES},
                }
                for system, report in reports.items()
            },
        }
        self.path("report.json").write_text(
            json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        plotting.plot_metric_bars(aggregates, self.path("figures", "scores_bleu4.png"))
        plotting.plot_all_metrics(aggregates, self.path("figures", "scores_all.png"))
        log.info("report written to %s", tsv)
        return aggregates

    # ----------------------------------------------------------- pipeline

    def run(self):
        """The full experiment: prepare, embed, fold, train, generate,
        evaluate."""
        self.prepare_contexts()
        self.train_transe()
        self.make_folds()
        systems = self.config.system_list()
        for fold in self.folds:
            for system in systems:
                self.train_system(system, fold.fold_id)
                self.generate(system, fold.fold_id)
        return self.evaluate(systems)

    # ---------------------------------------------------------- human eval

    def export_human_eval(self, n=None, seed=None, fold_id=0):
        """Blinded annotation sheet: per row the fact, the gold question and
        the systems' outputs in a per-row shuffled column order. The column
        order per row goes to a separate key file."""
        cfg = self.config
        n = n or cfg.human_eval_n
        seed = cfg.seed if seed is None else seed
        systems = cfg.system_list()
        fold = self._fold(fold_id)
        generations = {
            system: dict((i, toks) for i, toks, _ in self.read_generations(system, fold_id))
            for system in systems}

        test_ids = list(fold.test)
        if n > len(test_ids):
            log.warning("human eval capped at %d rows (test split size)", len(test_ids))
            n = len(test_ids)
        rng = np.random.default_rng([seed, 73])
        chosen = sorted(int(test_ids[k]) for k in rng.permutation(len(test_ids))[:n])

        out = self.path("human_eval.tsv")
        key_path = self.path("human_eval_key.tsv")
        columns = [f"output_{chr(ord('a') + k)}" for k in range(len(systems))]
        with open(out, "w", encoding="utf-8") as fh, \
                open(key_path, "w", encoding="utf-8") as kfh:
            for line in HUMAN_EVAL_RUBRIC:
                fh.write(line + "\n")
            fh.write("row\tsubject\tpredicate\tobject\tgold\t" + "\t".join(columns) + "\n")
            kfh.write("row\t" + "\t".join(columns) + "\n")
            for row, i in enumerate(chosen):
                sample = self.samples[i]
                order = [systems[k] for k in rng.permutation(len(systems))]
                outputs = [" ".join(generations[s].get(i, [])) for s in order]
                fh.write("\t".join([str(row), sample.subject, sample.predicate,
                                    sample.obj, sample.question] + outputs) + "\n")
                kfh.write("\t".join([str(row)] + order) + "\n")
        log.info("human-eval sheet with %d rows -> %s (key: %s)", n, out, key_path)
        return out, key_path
