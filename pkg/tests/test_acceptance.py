"""Release gate.

Each test here is one acceptance criterion, checked at its stated tolerance
and printing one summary line.  Run with ``pytest tests/test_acceptance.py -v``
for the per-criterion verdicts.
"""

from __future__ import annotations

import math
import re
import time

import numpy as np
import pytest

from mwetag.cli import dispatch
from mwetag.corpus import Corpus, load_model, read_column_file, save_model, write_column_file
from mwetag.crf import (
    CrfModel,
    LabelSet,
    TrainConfig,
    build_lattice,
    decode_lattice,
    gradient,
    log_partition,
    regularized_objective,
    sequence_log_prob,
    sequence_score,
    train,
    viterbi_decode,
)
from mwetag.evaluation import f_measure, score
from mwetag.features import Gazetteer, encode_corpus
from mwetag.ga import evaluate_fitness, run_ga, split_folds, GaConfig
from mwetag.stemmer import AffixLexicon, load_affix_lexicon, stem
from mwetag.templates import (
    FeatureMacro,
    Template,
    default_catalogue,
    parse_template,
    serialize_template,
)
from tests.conftest import (
    make_record,
    make_recovery_raw,
    make_separable_sentences,
    recovery_lexicon,
)
from tests.test_crf import enumerate_scores, random_model_and_sentence


def test_criterion_01_reported_f_measure_arithmetic():
    first = f_measure(86.84, 64.08, beta=1.0)
    third = f_measure(86.06, 62.24, beta=1.0)
    assert first == pytest.approx(73.74, abs=0.01)
    assert third == pytest.approx(72.24, abs=0.02)
    print(f"criterion 1: PASS  f(86.84,64.08)={first:.4f} (73.74±0.01), "
          f"f(86.06,62.24)={third:.4f} (72.24±0.02)")


@pytest.mark.xfail(
    reason="70.83 is not the harmonic mean of 85.53 and 60.39; "
    "2*85.53*60.39/(85.53+60.39) = 70.7944, which misses 70.83 by 0.0356",
    strict=True,
)
def test_criterion_01_middle_triple_target():
    assert f_measure(85.53, 60.39, beta=1.0) == pytest.approx(70.83, abs=0.02)


def test_criterion_01_middle_triple_true_value():
    value = f_measure(85.53, 60.39, beta=1.0)
    assert value == pytest.approx(70.7944, abs=1e-4)
    print(f"criterion 1 (note): f(85.53,60.39)={value:.4f}; the 70.83±0.02 "
          "target is arithmetically unreachable and tracked as a strict xfail")


def test_criterion_02_inference_matches_enumeration():
    rng = np.random.default_rng(2026)
    labels = LabelSet().labels
    worst_z = worst_sum = 0.0
    for _ in range(100):
        T = int(rng.integers(1, 7))
        model, sentence = random_model_and_sentence(rng, T)
        lattice = build_lattice(model, sentence)
        scores = enumerate_scores(lattice)
        log_z_enumerated = math.log(sum(math.exp(v) for v in scores.values()))
        gap = abs(log_partition(lattice) - log_z_enumerated)
        worst_z = max(worst_z, gap)
        assert gap < 1e-8

        path = decode_lattice(lattice)
        assert sequence_score(lattice, path) == pytest.approx(
            max(scores.values()), abs=1e-9
        )

        total = sum(
            math.exp(sequence_log_prob(model, sentence, [labels[y] for y in seq]))
            for seq in scores
        )
        worst_sum = max(worst_sum, abs(total - 1.0))
        assert total == pytest.approx(1.0, abs=1e-8)
    print(f"criterion 2: PASS  100 instances; worst |logZ gap| {worst_z:.2e}, "
          f"worst |sum-1| {worst_sum:.2e}")


def test_criterion_03_gradient_matches_finite_differences():
    rng = np.random.default_rng(31)
    h = 1e-5
    worst = 0.0
    coords = 0
    for _ in range(20):
        model, sentence = random_model_and_sentence(rng, T=5)
        model = CrfModel(model.label_set, model.template, model.weights, rho=3.0)
        data = [sentence]
        analytic = gradient(model, data)
        assert analytic
        for key, value in analytic.items():
            up = dict(model.weights)
            up[key] = up.get(key, 0.0) + h
            down = dict(model.weights)
            down[key] = down.get(key, 0.0) - h
            hi = regularized_objective(
                CrfModel(model.label_set, model.template, up, rho=model.rho), data
            )
            lo = regularized_objective(
                CrfModel(model.label_set, model.template, down, rho=model.rho), data
            )
            fd = (hi - lo) / (2 * h)
            rel = abs(value - fd) / max(1.0, abs(value), abs(fd))
            worst = max(worst, rel)
            coords += 1
            assert rel < 1e-4, key
    print(f"criterion 3: PASS  20 instances, {coords} coordinates, "
          f"worst relative error {worst:.2e}")


def test_criterion_04_training_fits_a_separable_corpus():
    data = make_separable_sentences(30, seed=77)
    template = parse_template("U00:%x[0,21]\nB\n")
    config = TrainConfig(rho=100.0, max_iterations=200)
    model = train(data, template, config=config)
    gold = [[record.label for record in sentence] for sentence in data]
    predicted = [viterbi_decode(model, sentence) for sentence in data]
    report = score(gold, predicted, mode="span")
    assert report.f_measure == 100.0

    # batch ascent state depends only on the iteration count, so training
    # k iterations replays the first k steps of a longer run
    values = []
    for k in (1, 2, 3, 5, 8, 13, 21):
        partial = train(data, template, config=TrainConfig(rho=100.0, max_iterations=k))
        values.append(regularized_objective(partial, data))
    values.append(regularized_objective(model, data))
    for earlier, later in zip(values, values[1:]):
        assert later >= earlier - 1e-9
    print(f"criterion 4: PASS  span F {report.f_measure:.2f} on training data; "
          f"objective non-decreasing over prefixes {[f'{v:.3f}' for v in values]}")


def test_criterion_05_stemmer_reproduction():
    from importlib import resources

    base = resources.files("mwetag") / "data"
    with (base / "prefixes_list.txt").open(encoding="utf-8") as pf:
        with (base / "suffixes_list.txt").open(encoding="utf-8") as sf:
            packaged = load_affix_lexicon(pf, sf)
    word = (
        "পুশিনহনজারম"
        "গাদাবানিদাকো"
    )
    result = stem(word, packaged)
    assert result.stem == "পু"
    assert result.suffix_count == 10

    lexicon = AffixLexicon(
        prefixes=("ab", "a", "ba"), suffixes=("xyz", "yz", "z", "zy")
    )
    rng = np.random.default_rng(55)
    roots = ["m", "no", "pqr", "ayz", "bz"]
    checked = 0
    for _ in range(1000):
        prefix_stack = [
            lexicon.prefixes[rng.integers(0, 3)] for _ in range(rng.integers(0, 4))
        ]
        suffix_stack = [
            lexicon.suffixes[rng.integers(0, 4)] for _ in range(rng.integers(0, 4))
        ]
        word = "".join(prefix_stack) + roots[rng.integers(0, 5)] + "".join(suffix_stack)
        result = stem(word, lexicon)
        rebuilt = (
            "".join(result.stripped_prefixes)
            + result.stem
            + "".join(reversed(result.stripped_suffixes))
        )
        assert rebuilt == word
        again = stem(result.stem, lexicon)
        assert again.stem == result.stem
        assert again.prefix_count == 0 and again.suffix_count == 0
        checked += 1
    print(f"criterion 5: PASS  ten-suffix decomposition exact; reconstruction "
          f"and fixpoint hold on {checked} random compositions")


RECOVERY_TRAIN = TrainConfig(max_iterations=40)
INFORMATIVE = {10, 24, 35}  # suffix_slot_1, digit, pos[0]


def recovery_corpus():
    raw = make_recovery_raw(200, seed=41)
    gazetteer = Gazetteer(salutations=frozenset(), followups=frozenset())
    return encode_corpus(raw, recovery_lexicon(), gazetteer)


def test_criterion_06_ga_recovers_informative_genes():
    started = time.monotonic()
    corpus = recovery_corpus()
    tokens = sum(len(s) for s in corpus)
    assert 1800 <= tokens <= 2400
    catalogue = default_catalogue()
    config = GaConfig(
        population_size=12,
        max_generations=50,
        stagnation_generations=5,
        folds=3,
        seed=0,
    )
    result = run_ga(corpus, catalogue, config, RECOVERY_TRAIN)
    picked = {i for i, bit in enumerate(result.best.bits) if bit}
    assert INFORMATIVE <= picked

    folds = split_folds(corpus, config.folds, config.seed)
    all_ones = evaluate_fitness((1,) * 38, corpus, catalogue, folds, RECOVERY_TRAIN)
    assert result.best.fitness >= all_ones - 2.0

    best_sequence = [record.best_fitness for record in result.history]
    assert best_sequence == sorted(best_sequence)
    elapsed = time.monotonic() - started
    assert elapsed < 600.0
    print(f"criterion 6: PASS  best {result.best.fitness:.2f} vs all-ones "
          f"{all_ones:.2f}, informative genes {sorted(INFORMATIVE)} all selected, "
          f"{len(result.history)} generations in {elapsed:.0f}s")


def test_criterion_07_ga_search_cli_is_deterministic(tmp_path):
    from tests.test_cli import AFFIX_FLAGS, RAW

    encoded = tmp_path / "encoded.txt"
    assert dispatch(["encode", *AFFIX_FLAGS, "--out", str(encoded), RAW]) == 0
    outputs = []
    for name in ("first", "second"):
        template_out = tmp_path / f"{name}-template.txt"
        history_out = tmp_path / f"{name}-history.csv"
        code = dispatch(
            [
                "ga-search", str(encoded),
                "--out", str(template_out),
                "--history", str(history_out),
                "--population", "6",
                "--generations", "3",
                "--folds", "3",
                "--max-iterations", "8",
                "--seed", "5",
            ]
        )
        assert code == 0
        outputs.append((template_out.read_bytes(), history_out.read_bytes()))
    assert outputs[0] == outputs[1]
    print("criterion 7: PASS  two ga-search runs wrote byte-identical "
          f"templates ({len(outputs[0][0])} B) and histories ({len(outputs[0][1])} B)")


TEMPLATE_LINE = re.compile(r"^(U[A-Za-z0-9_]*:%x\[-?\d+,\d+\](/%x\[-?\d+,\d+\])*|B)$")


def test_criterion_08_round_trips_and_syntax_conformance(tmp_path):
    rng = np.random.default_rng(88)

    for case in range(200):
        ids = rng.choice(100, size=rng.integers(1, 8), replace=False)
        macros = tuple(
            FeatureMacro(
                id=f"U{int(i):02d}",
                refs=tuple(
                    (int(rng.integers(-3, 4)), int(rng.integers(0, 22)))
                    for _ in range(rng.integers(1, 4))
                ),
            )
            for i in sorted(ids)
        )
        template = Template(macros=macros, include_label_bigram=bool(rng.integers(0, 2)))
        text = serialize_template(template)
        assert parse_template(text) == template
        for line in text.splitlines():
            assert TEMPLATE_LINE.fullmatch(line), line

    for case in range(60):
        sentences = []
        for _ in range(rng.integers(1, 5)):
            sentences.append(
                tuple(
                    make_record(
                        word=f"w{rng.integers(0, 9)}",
                        pos=f"p{rng.integers(0, 4)}",
                        label=("O", "B-MWE", "I-MWE")[rng.integers(0, 3)],
                    )
                    for _ in range(rng.integers(1, 6))
                )
            )
        corpus = Corpus(sentences=tuple(sentences))
        path = tmp_path / f"corpus{case}.txt"
        write_column_file(corpus, path)
        assert read_column_file(path) == corpus
        body = path.read_text(encoding="utf-8")
        assert not body.startswith("\n") and body.endswith("\n")
        assert "\n\n\n" not in body
        for line in body.splitlines():
            if line:
                fields = line.split(" ")
                assert len(fields) == 23
                assert all(fields)

    template = parse_template("U00:%x[0,0]\nU01:%x[-1,21]/%x[0,21]\nB\n")
    for case in range(30):
        weights = {}
        for i in range(int(rng.integers(1, 40))):
            key = (f"U00:w{rng.integers(0, 50)}#{i}", ("O", "B-MWE", "I-MWE")[rng.integers(0, 3)])
            weights[key] = float(rng.normal()) * 10.0 ** int(rng.integers(-12, 13))
        model = CrfModel(
            label_set=LabelSet(),
            template=template,
            weights=weights,
            rho=float(rng.uniform(0.5, 50.0)),
        )
        path = tmp_path / f"model{case}.txt"
        save_model(model, path)
        back = load_model(path)
        assert back.weights == model.weights
        assert back.rho == model.rho
        assert back.template == model.template
        assert back.label_set.labels == model.label_set.labels
    print("criterion 8: PASS  200 template, 60 corpus, 30 model round trips; "
          "emitted files conform to the template/column syntax subset")


def test_criterion_09_fold_partition_balance():
    rng = np.random.default_rng(99)
    sentences = []
    total = 0
    index = 0
    while total < 45_000:
        length = int(rng.integers(5, 26))
        length = min(length, 45_000 - total)
        sentences.append(tuple(make_record(word=f"s{index}t{t}") for t in range(length)))
        total += length
        index += 1
    assert total == 45_000

    folds = split_folds(sentences, 3, seed=4)
    sizes = [sum(len(s) for s in fold) for fold in folds]
    for size in sizes:
        assert abs(size - 15_000) <= 0.02 * 15_000
    seen_ids = [id(s) for fold in folds for s in fold]
    assert len(seen_ids) == len(sentences)
    assert set(seen_ids) == {id(s) for s in sentences}
    print(f"criterion 9: PASS  fold token counts {sizes} within 2% of 15000, "
          "disjoint and exhaustive")
