"""Acceptance suite: one test per criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS lines
(they only print when the criterion's assertions all hold).
"""

import itertools
import time

import numpy as np
import pytest

from zeroshot_qg import toydata
from zeroshot_qg.copyactions import annotate_context, annotate_question, deannotate
from zeroshot_qg.dataset import (
    build_fold_vocabulary,
    encode_samples,
    prepare_samples,
    read_question_records,
    realize_tokens,
)
from zeroshot_qg.contexts import read_first_sentences, read_labels, read_sentences, read_types
from zeroshot_qg.expconfig import ExperimentConfig
from zeroshot_qg.folds import achieved_ratios, check_disjoint, make_folds
from zeroshot_qg.harness import Experiment
from zeroshot_qg.kb import TranseConfig, TransEModel, filtered_object_ranks, transe_train
from zeroshot_qg.metrics import bleu, meteor_lite, rouge_l
from zeroshot_qg.model import ModelConfig, QGModel, TrainConfig
from zeroshot_qg.neural import (
    AttentionWeights,
    GruWeights,
    ParameterSet,
    affine,
    affine_backward,
    attend,
    attend_backward,
    gru_cell,
    gru_cell_backward,
    softmax,
)
from zeroshot_qg.neural.gradcheck import numeric_gradient, rel_error
from zeroshot_qg.textproc import UPOS_TAGS, TaggedToken, pos_tag, tokenize
from zeroshot_qg.toydata import TOY_KB_TRIPLES

RTOL = 1e-4


def report(line):
    print(f"\nACCEPTANCE {line}")


def load_corpus(tmp_dir, corpus):
    paths = toydata.write_corpus(tmp_dir, corpus)
    return prepare_samples(
        read_question_records(paths["questions"]),
        read_labels(paths["labels"]),
        read_types(paths["types"]),
        read_sentences(paths["sentences"]),
        read_first_sentences(paths["first_sentences"]),
    ), paths


def experiment_config(paths, work, **overrides):
    values = dict(
        questions=str(paths["questions"]), triples=str(paths["triples"]),
        labels=str(paths["labels"]), types=str(paths["types"]),
        sentences=str(paths["sentences"]),
        first_sentences=str(paths["first_sentences"]),
        dataset=str(work / "dataset.jsonl"), out_dir=str(work / "out"),
        kb_dim=16, transe_epochs=60, word_dim=16, ctx_dim=24, dec_dim=48,
        max_decode_len=20, batch_size=32, learning_rate=0.006, seed=29)
    values.update(overrides)
    return ExperimentConfig(**values)


# -------------------------------------------------------------------- C1

def test_c1_gradient_correctness():
    started = time.time()
    rng = np.random.default_rng(17)

    # affine
    x, w = rng.normal(size=5), rng.normal(size=(4, 5))
    d_out = rng.normal(size=4)
    d_x, d_w, d_b = affine_backward(d_out, x, w)
    b = rng.normal(size=4)
    assert rel_error(d_x, numeric_gradient(lambda: d_out @ affine(x, w, b), x)).max() < RTOL
    assert rel_error(d_w, numeric_gradient(lambda: d_out @ affine(x, w, b), w)).max() < RTOL
    assert rel_error(d_b, numeric_gradient(lambda: d_out @ affine(x, w, b), b)).max() < RTOL

    # softmax + NLL fused gradient: d_logits = p - onehot(target)
    logits = rng.normal(size=7)
    target = 3
    probs = softmax(logits)
    analytic = probs.copy()
    analytic[target] -= 1.0
    numeric = numeric_gradient(lambda: -np.log(softmax(logits)[target]), logits)
    assert rel_error(analytic, numeric).max() < RTOL

    # GRU cell, encoder form and attention (decoder) form
    for att_dim in (None, 5):
        params = ParameterSet()
        weights = GruWeights(params, "g", 3, 4, att_dim, rng, scale=0.6)
        xg, h_prev = rng.normal(size=3), rng.normal(size=4)
        att = rng.normal(size=att_dim) if att_dim else None
        dh = rng.normal(size=4)

        def gru_loss():
            return dh @ gru_cell(xg, h_prev, att, weights)[0]

        params.zero_grads()
        _, cache = gru_cell(xg, h_prev, att, weights)
        d_xg, d_hp, d_att = gru_cell_backward(dh, cache, weights)
        for p in params:
            assert rel_error(p.grad, numeric_gradient(gru_loss, p.value)).max() < RTOL
        assert rel_error(d_xg, numeric_gradient(gru_loss, xg)).max() < RTOL
        assert rel_error(d_hp, numeric_gradient(gru_loss, h_prev)).max() < RTOL
        if att_dim:
            assert rel_error(d_att, numeric_gradient(gru_loss, att)).max() < RTOL

    # attention module
    params = ParameterSet()
    att_w = AttentionWeights(params, "a", 3, 4, 5, rng, scale=0.6)
    keys, s_prev, d_sum = rng.normal(size=(6, 4)), rng.normal(size=3), rng.normal(size=4)

    def att_loss():
        return d_sum @ attend(keys, s_prev, att_w)[1]

    params.zero_grads()
    _, _, cache = attend(keys, s_prev, att_w)
    d_keys, d_s = attend_backward(d_sum, cache, att_w)
    for p in params:
        assert rel_error(p.grad, numeric_gradient(att_loss, p.value)).max() < RTOL
    assert rel_error(d_keys, numeric_gradient(att_loss, keys)).max() < RTOL
    assert rel_error(d_s, numeric_gradient(att_loss, s_prev)).max() < RTOL

    # full miniature model (both variants), loss through to the word table
    from test_model import tiny_model, tiny_sample
    for use_contexts in (True, False):
        model = tiny_model(seed=21, use_contexts=use_contexts)
        sample = tiny_sample(model)

        def model_loss():
            return model.forward_sample(sample)[0]

        model.params.zero_grads()
        _, cache = model.forward_sample(sample)
        model.backward_sample(cache, scale=1.0)
        for p in model.params:
            assert rel_error(p.grad, numeric_gradient(model_loss, p.value)).max() < RTOL

    elapsed = time.time() - started
    assert elapsed < 60.0
    report(f"C1 PASS - all layer and full-model gradients within {RTOL} "
           f"of central differences ({elapsed:.1f}s)")


# -------------------------------------------------------------------- C2

def test_c2_metric_oracles():
    # BLEU clipped-precision case: BP=1, clipped unigram precision 1/4
    got = bleu([tokenize("the the the the")], [tokenize("the cat")], max_n=1)
    assert abs(got - 0.25) <= 1e-9

    # ROUGE-L against the exhaustive all-subsequence oracle, every pair of
    # sequences of length <= 6 over a 3-symbol alphabet
    alphabet = ("a", "b", "c")
    seqs = [tuple(p) for n in range(7) for p in itertools.product(alphabet, repeat=n)]

    def subseq_buckets(s):
        subs = {()}
        for tok in s:
            subs |= {t + (tok,) for t in subs}
        buckets = [set() for _ in range(len(s) + 1)]
        for t in subs:
            buckets[len(t)].add(t)
        return buckets

    buckets = [subseq_buckets(s) for s in seqs]
    beta = 1.2
    pairs = 0
    for i in range(len(seqs)):
        for j in range(i, len(seqs)):
            lcs = 0
            for length in range(min(len(seqs[i]), len(seqs[j])), 0, -1):
                if not buckets[i][length].isdisjoint(buckets[j][length]):
                    lcs = length
                    break
            for a, b in ((i, j), (j, i)):
                ca, cb = seqs[a], seqs[b]
                if not ca or not cb or lcs == 0:
                    expected = 0.0
                else:
                    p_val, r_val = lcs / len(ca), lcs / len(cb)
                    expected = (1 + beta ** 2) * p_val * r_val / (r_val + beta ** 2 * p_val)
                assert abs(rouge_l(list(ca), list(cb)) - expected) <= 1e-9
                pairs += 1

    # METEOR-lite hand-formula cases
    assert abs(meteor_lite(tokenize("the cat sat"), tokenize("the cat sat down"))
               - 0.754985754985755) <= 1e-9
    assert abs(meteor_lite(["a", "b", "c"], ["a", "b", "c"])
               - 0.9814814814814815) <= 1e-9
    assert meteor_lite(["x"], ["y"]) == 0.0
    report(f"C2 PASS - BLEU/ROUGE-L/METEOR-lite match their oracles to 1e-9 "
           f"({pairs} exhaustive ROUGE pairs)")


# -------------------------------------------------------------------- C3

def test_c3_copy_action_fidelity():
    # Exact annotated contexts
    c1, m1 = annotate_context(pos_tag(tokenize("[S] death by [O]")), "C1")
    c2, m2 = annotate_context(pos_tag(tokenize("disease")), "C2")
    c3, m3 = annotate_context(pos_tag(tokenize("musical artist")), "C3")
    assert c1 == ["[S]", "[C1_NOUN]", "[C1_ADP]", "[O]"]
    assert c2 == ["[C2_NOUN]"]
    assert c3 == ["[C3_ADJ]", "[C3_NOUN]"]
    question = tokenize("what caused the death of the artist [S] ?")
    annotated = annotate_question(question, [m1, m2, m3])
    assert annotated == ["what", "caused", "the", "[C1_NOUN]", "of", "the",
                         "[C3_NOUN]", "[S]", "?"]
    restored, dropped = deannotate(annotated, [m1, m2, m3])
    assert restored == question and dropped == 0

    # 10,000 fuzzed round trips
    rng = np.random.default_rng(101)
    words = [f"w{i}" for i in range(40)]
    tags = list(UPOS_TAGS)
    for _ in range(10_000):
        maps = []
        context_words = []
        for cid in ("C1", "C2", "C3"):
            n = int(rng.integers(1, 5))
            picks = rng.choice(len(words), size=n, replace=False)
            ctx = [TaggedToken(words[p], tags[int(rng.integers(len(tags)))])
                   for p in picks]
            _, mapping = annotate_context(ctx, cid)
            maps.append(mapping)
            context_words.extend(words[p] for p in picks)
        q = [context_words[int(rng.integers(len(context_words)))]
             if rng.random() < 0.5 else words[int(rng.integers(len(words)))]
             for _ in range(int(rng.integers(1, 10)))]
        out, dropped = deannotate(annotate_question(q, maps), maps)
        assert out == q and dropped == 0
    report("C3 PASS - Table-style annotation exact; 10,000 fuzzed round trips hold")


# -------------------------------------------------------------------- C4

def test_c4_transe_sanity():
    started = time.time()
    trained_ranks = []
    random_ranks = []
    for seed in range(5):
        config = TranseConfig(dim=16, margin=1.0, epochs=200,
                              learning_rate=0.01, seed=seed)
        model, _ = transe_train(TOY_KB_TRIPLES, config)
        trained_ranks.append(np.mean(filtered_object_ranks(model, TOY_KB_TRIPLES)))
        rng = np.random.default_rng(1000 + seed)
        bound = 6.0 / np.sqrt(16)
        random_model = TransEModel(model.vocab,
                                   rng.uniform(-bound, bound, model.table.shape))
        random_ranks.append(np.mean(filtered_object_ranks(random_model, TOY_KB_TRIPLES)))
    trained = float(np.mean(trained_ranks))
    baseline = float(np.mean(random_ranks))
    elapsed = time.time() - started
    assert trained <= baseline / 2, (trained, baseline)
    assert elapsed < 30.0
    report(f"C4 PASS - toy-KB mean filtered rank {trained:.2f} <= half of random "
           f"baseline {baseline:.2f} over 5 seeds ({elapsed:.1f}s)")


# -------------------------------------------------------------------- C5

def test_c5_fold_protocol():
    rng = np.random.default_rng(2024)
    granular_checked = 0
    for trial in range(100):
        n_big = int(rng.integers(12, 22))
        sizes = [int(rng.integers(50, 81)) for _ in range(n_big)]
        sizes += [int(rng.integers(5, 50)) for _ in range(int(rng.integers(0, 5)))]
        samples = []
        for g, size in enumerate(sizes):
            samples.extend({"predicate": f"k{g:03d}"} for _ in range(size))
        folds = make_folds(samples, "predicate", min_group=50, n_folds=3, seed=trial)
        small_ids = {i for i, s in enumerate(samples)
                     if sizes[int(s["predicate"][1:])] < 50}
        for fold in folds:
            check_disjoint(fold, samples)
            used = set(fold.train) | set(fold.valid) | set(fold.test)
            assert used.isdisjoint(small_ids)  # <50 groups always excluded
            for got, target in zip(achieved_ratios(fold), (0.7, 0.1, 0.2)):
                assert abs(got - target) <= 0.05
            granular_checked += 1
    report(f"C5 PASS - 100 random datasets: folds disjoint, sub-50 groups "
           f"excluded, ratios within 5pp ({granular_checked} folds)")


# -------------------------------------------------------------------- C6

def test_c6_overfit_memorization(tmp_path):
    started = time.time()
    samples, paths = load_corpus(tmp_path, toydata.build_corpus(
        n_predicates=10, samples_per_predicate=5, n_subjects=25,
        n_objects=10, seed=5))
    assert len(samples) == 50
    labels = read_labels(paths["labels"])

    from zeroshot_qg.kb import read_triples
    kb_model, _ = transe_train(read_triples(paths["triples"]),
                               TranseConfig(dim=12, epochs=40, seed=0))
    vocab = build_fold_vocabulary(samples, 30000, use_copy=True)
    encoded = encode_samples(samples, vocab, kb_model, use_copy=True)
    config = ModelConfig(kb_dim=12, ctx_dim=16, dec_dim=32, word_dim=12,
                         vocab_size=30000, max_decode_len=20, seed=1)
    model = QGModel(config, vocab, kb_model)

    epochs_run = 0
    accuracy = 0.0
    while epochs_run < 500:
        model.train(encoded, train_config=TrainConfig(
            epochs=50, batch_size=10, learning_rate=0.01, lr_decay=1.0,
            seed=epochs_run, select_by_valid_bleu=False))
        epochs_run += 50
        accuracy = model.token_accuracy(encoded)
        if accuracy >= 0.99:
            break
    assert accuracy >= 0.99, f"{accuracy:.4f} after {epochs_run} epochs"

    exact = 0
    for sample, enc in zip(samples, encoded):
        result = model.generate(enc, beam_width=1)
        realized, _ = realize_tokens(result.tokens, sample, labels)
        exact += int(realized == tokenize(sample.question))
    elapsed = time.time() - started
    assert exact >= 0.9 * len(samples), f"{exact}/{len(samples)} exact"
    assert elapsed < 600.0
    report(f"C6 PASS - 50-sample set memorized: {accuracy:.1%} token accuracy "
           f"after {epochs_run} epochs, {exact}/50 exact regenerations "
           f"({elapsed:.0f}s)")


# -------------------------------------------------------------------- C7

def test_c7_zero_shot_directional(tmp_path):
    work = tmp_path / "zeroshot"
    paths = toydata.write_corpus(work / "data", toydata.zero_shot_corpus())
    cfg = experiment_config(
        paths, work, seed=29, n_folds=3, key_kind="predicate", epochs=14,
        systems="context_qg_copy,context_qg,encoder_decoder")
    exp = Experiment(cfg)
    exp.prepare_contexts()
    exp.train_transe()
    exp.make_folds()
    for fold in exp.folds:
        held_out = {exp.samples[i].predicate for i in fold.test}
        assert len(held_out) == 6  # 30 predicates, 6 held out per fold
        for system in cfg.system_list():
            exp.train_system(system, fold.fold_id)
            exp.generate(system, fold.fold_id)
    agg = exp.evaluate()
    copy_b4 = agg["context_qg_copy"]["bleu_4"][0]
    nocopy_b4 = agg["context_qg"]["bleu_4"][0]
    encdec_b4 = agg["encoder_decoder"]["bleu_4"][0]
    assert copy_b4 > encdec_b4, (copy_b4, encdec_b4)
    assert copy_b4 >= nocopy_b4, (copy_b4, nocopy_b4)
    report(f"C7 PASS - 3-fold mean BLEU-4 ordering holds: copy {copy_b4:.3f} "
           f"> enc-dec {encdec_b4:.3f}; copy >= no-copy {nocopy_b4:.3f}")


# -------------------------------------------------------------------- C8

def test_c8_determinism(tmp_path):
    work = tmp_path / "det"
    paths = toydata.write_corpus(work / "data", toydata.build_corpus(
        n_predicates=6, samples_per_predicate=50, n_subjects=40,
        n_objects=16, seed=3))
    cfg = experiment_config(paths, work, seed=7, n_folds=1, epochs=2,
                            systems="select,r_transe_copy,context_qg_copy")

    def run_and_snapshot():
        Experiment(cfg).run()
        out = work / "out"
        tracked = ["report.tsv", "report.json", "folds.json",
                   "checkpoints/transe.ckpt",
                   "checkpoints/context_qg_copy_fold0.ckpt",
                   "checkpoints/r_transe_copy_fold0.ckpt",
                   "generations/fold0_select.tsv",
                   "generations/fold0_context_qg_copy.tsv",
                   "figures/scores_bleu4.png"]
        return {name: (out / name).read_bytes() for name in tracked}

    first = run_and_snapshot()
    second = run_and_snapshot()
    for name in first:
        assert first[name] == second[name], f"{name} differs between reruns"
    report(f"C8 PASS - rerun produced byte-identical artifacts "
           f"({len(first)} files compared)")


# -------------------------------------------------------------------- C9

def test_c9_end_to_end_smoke(tmp_path):
    started = time.time()
    work = tmp_path / "smoke"
    paths = toydata.write_corpus(work / "data", toydata.smoke_corpus())
    cfg = experiment_config(paths, work, seed=11, n_folds=2, epochs=8,
                            systems="context_qg_copy,select")
    exp = Experiment(cfg)
    aggregates = exp.run()
    elapsed = time.time() - started
    assert elapsed < 300.0

    report_lines = (work / "out" / "report.tsv").read_text().splitlines()
    assert report_lines[0] == "model\tbleu_1\tbleu_2\tbleu_3\tbleu_4\trouge_l\tmeteor_lite"
    assert len(report_lines) == 3
    assert {line.split("\t")[0] for line in report_lines[1:]} == \
        {"context_qg_copy", "select"}
    assert (work / "out" / "figures" / "scores_all.png").exists()
    assert set(aggregates) == {"context_qg_copy", "select"}
    report(f"C9 PASS - bundled smoke experiment end to end in {elapsed:.0f}s "
           f"with a table-shaped report")
