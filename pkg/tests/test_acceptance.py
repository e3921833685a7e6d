"""Acceptance criteria, one test each; every test prints a PASS/FAIL line with its measurement."""

import datetime as dt
import io
import json
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import make_dataset
from hitpredict._dates import DateWindow
from hitpredict.canonicalize import DEFAULT_FEATURING_TOKENS, SongKey, normalize_text
from hitpredict.charts import ChartEntry, ChartKind, build_label_table, parse_chart_csv
from hitpredict.cli import main
from hitpredict.errors import DataError, EmptyTextError
from hitpredict.evaluation import cross_validate, roc_curve, stratified_folds
from hitpredict.features import build_listening_dataset
from hitpredict.learners import ModelSpec, score, train
from hitpredict.learners.logistic import loss_and_grad
from hitpredict.learners.rules import foil_gain
from hitpredict.learners.tree import entropy, gain_ratio
from hitpredict.scrobbles import Scrobble, clean_scrobbles, parse_scrobbles
from hitpredict.synth import SynthConfig, generate

UTC = dt.timezone.utc


def verdict(capsys, label, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, f"{label}: {detail}"


# --------------------------------------------------------------------------
# 1. AUC oracle


def pair_count_auc(scores, labels):
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (len(pos) * len(neg))


def test_c1_auc_matches_mann_whitney(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, tied_sets = 0.0, 0
    for i in range(1000):
        n = int(rng.integers(2, 201))
        labels = rng.integers(0, 2, n)
        labels[rng.choice(n, 2, replace=False)] = [0, 1]
        if i % 3 == 0:
            scores = rng.integers(0, max(2, n // 4), n).astype(float)  # heavy ties
        else:
            scores = rng.normal(size=n)
        tied_sets += len(np.unique(scores)) < n
        worst = max(worst, abs(roc_curve(scores, labels).auc - pair_count_auc(scores, labels)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and tied_sets >= 200 and elapsed < 10
    verdict(capsys, "C1 AUC oracle", ok, f"max |diff| {worst:.2e} over 1000 sets, {tied_sets} with ties, {elapsed:.2f}s")


# --------------------------------------------------------------------------
# 2. logistic gradient


def test_c2_logistic_gradient(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(17)
    h = 1e-5
    worst = 0.0
    for _ in range(100):
        n, p = int(rng.integers(2, 21)), int(rng.integers(1, 9))
        Z = rng.normal(size=(n, p))
        y_pm = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        theta = rng.normal(size=p + 1)
        l2 = float(rng.choice([0.0, 1e-4, 0.1]))
        _, gw, gb = loss_and_grad(theta[:p], theta[p], Z, y_pm, l2)
        analytic = np.r_[gw, gb]
        numeric = np.empty(p + 1)
        for i in range(p + 1):
            e = np.zeros(p + 1)
            e[i] = h
            up = loss_and_grad((theta + e)[:p], (theta + e)[p], Z, y_pm, l2)[0]
            down = loss_and_grad((theta - e)[:p], (theta - e)[p], Z, y_pm, l2)[0]
            numeric[i] = (up - down) / (2 * h)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
        worst = max(worst, float(np.max(np.abs(analytic - numeric) / denom)))
    elapsed = time.perf_counter() - t0
    verdict(capsys, "C2 logistic gradient", worst < 1e-4 and elapsed < 10,
            f"max relative error {worst:.2e} over 100 datasets, {elapsed:.2f}s")


# --------------------------------------------------------------------------
# 3 + 4. planted early-adopter signal


def synthetic_dataset(config):
    corpus = generate(config)
    charts = parse_chart_csv(io.StringIO(corpus.charts_csv))
    raw = parse_scrobbles(io.StringIO(corpus.scrobbles_csv))
    assert not charts.rejects and not raw.rejects
    labels = build_label_table(charts, config.top_n)
    cleaned = clean_scrobbles(raw, config.window)
    return build_listening_dataset(cleaned, labels, config.window, count_mode="weekly")


@pytest.fixture(scope="module")
def signal_runs():
    t0 = time.perf_counter()
    signal = synthetic_dataset(SynthConfig())
    null = synthetic_dataset(SynthConfig(adopter_strength=0.0))
    runs = {"signal_LR": cross_validate(ModelSpec("logistic"), signal, k=10, seed=42)}
    for name in ("logistic", "decision_tree", "rule_list"):
        spec = ModelSpec(name)
        runs[f"null_{spec.short_name}"] = cross_validate(spec, null, k=10, seed=42)
    return runs, time.perf_counter() - t0


def test_c3_signal_recovery(capsys, signal_runs):
    runs, elapsed = signal_runs
    sig, null = runs["signal_LR"].mean_auc, runs["null_LR"].mean_auc
    ok = sig >= 0.75 and 0.40 <= null <= 0.60 and elapsed < 120
    verdict(capsys, "C3 early-adopter signal", ok,
            f"LR mean AUC signal {sig:.4f} (>= 0.75), null {null:.4f} (in [0.40, 0.60]), {elapsed:.1f}s for C3+C4")


def test_c4_degenerate_learners_on_null(capsys, signal_runs):
    runs, _ = signal_runs
    tree, rules = runs["null_C4.5"].mean_auc, runs["null_RR"].mean_auc
    ok = 0.40 <= tree <= 0.60 and 0.40 <= rules <= 0.60
    verdict(capsys, "C4 null tree/rules", ok, f"C4.5 {tree:.4f}, RR {rules:.4f} (both in [0.40, 0.60])")


# --------------------------------------------------------------------------
# 5. labeling oracle


def random_chart_corpus(rng):
    n_songs, n_weeks = rng.randint(2, 50), rng.randint(1, 30)
    start = dt.date(2013, 1, 7)
    weeks = [start + dt.timedelta(weeks=i) for i in range(n_weeks)]
    songs = [SongKey(f"artist {i}", "title") for i in range(n_songs)]
    entries = []
    for _ in range(rng.randint(1, 150)):
        kind = rng.choice([ChartKind.MAIN, ChartKind.BUBBLING])
        entries.append(ChartEntry(rng.choice(weeks), kind, rng.randint(1, kind.max_position), rng.choice(songs)))
    scrobbles = [
        Scrobble(dt.datetime.combine(rng.choice(weeks), dt.time(), UTC) + dt.timedelta(seconds=rng.randrange(604800)),
                 f"u{rng.randrange(8)}", rng.choice(songs))
        for _ in range(rng.randint(1, 200))
    ]
    window = DateWindow(start, weeks[-1] + dt.timedelta(days=6))
    return entries, scrobbles, window, weeks


def brute_labels(entries, top_n=20):
    out = {}
    for song in {e.song for e in entries}:
        mine = [e for e in entries if e.song == song]
        qualifying = [e.week_start for e in mine if e.chart_kind is ChartKind.MAIN and e.position <= top_n]
        if qualifying:
            out[song] = ("hit", min(qualifying))
        elif any(e.chart_kind is ChartKind.BUBBLING for e in mine):
            out[song] = ("nonhit", None)
    return out


def brute_rows(scrobbles, labels, weeks, mode):
    """Expected {(song, week): label} by rescanning every listen for every candidate row."""
    rows = {}
    for song, (cls, first_hit) in labels.items():
        listen_weeks = [s.timestamp.date() - dt.timedelta(days=s.timestamp.weekday()) for s in scrobbles if s.song == song]
        if not listen_weeks:
            continue
        for w in weeks:
            if cls == "hit" and w >= first_hit:
                continue
            present = w in listen_weeks if mode == "weekly" else min(listen_weeks) <= w
            if present:
                rows[(song, w)] = int(cls == "hit")
    return rows


def test_c5_labeling_oracle(capsys):
    t0 = time.perf_counter()
    rng = random.Random(5)
    mismatches, checked, error_cases = 0, 0, 0
    for _ in range(500):
        entries, scrobbles, window, weeks = random_chart_corpus(rng)
        expected_labels = brute_labels(entries)
        table = build_label_table(entries)
        got = {k: ("hit" if v.is_hit else "nonhit", v.first_hit_week) for k, v in table.items()}
        mismatches += got != expected_labels
        for mode in ("cumulative", "weekly"):
            expected = brute_rows(scrobbles, expected_labels, weeks, mode)
            try:
                d = build_listening_dataset(scrobbles, table, window, mode)
            except DataError:
                # the builder refuses when a class is empty; the oracle must agree
                error_cases += 1
                mismatches += len(set(expected.values())) == 2
                continue
            got_rows = {(i.song, i.week_start): int(y) for i, y in zip(d.instances, d.labels)}
            mismatches += got_rows != expected
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30
    verdict(capsys, "C5 labeling oracle", ok,
            f"{mismatches} mismatches over 500 corpora ({checked} datasets compared, {error_cases} refused), {elapsed:.1f}s")


# --------------------------------------------------------------------------
# 6. stratification


def test_c6_stratification(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    failures, trials = 0, 0
    for k in (2, 5, 10):
        done = 0
        while done < 200:
            n = int(rng.integers(2 * k, 400))
            labels = (rng.random(n) < rng.uniform(0.05, 0.95)).astype(int)
            if min(labels.sum(), n - labels.sum()) < k:
                continue
            f = stratified_folds(labels, k, int(rng.integers(1 << 31)))
            folds = [f.test_rows(i) for i in range(k)]
            partition = np.array_equal(np.sort(np.concatenate(folds)), np.arange(n))
            spread = max(np.ptp([int((labels[r] == c).sum()) for r in folds]) for c in (0, 1))
            failures += not partition or spread > 1
            done += 1
            trials += 1
    elapsed = time.perf_counter() - t0
    verdict(capsys, "C6 stratification", failures == 0 and elapsed < 5,
            f"{failures} failures over {trials} trials (k in 2, 5, 10), {elapsed:.2f}s")


# --------------------------------------------------------------------------
# 7. determinism and round-trip


CONFIG_7 = SynthConfig(n_songs=60, n_hit_songs=15, n_users=40, n_early_adopters=8, weeks=12, lead_weeks=6, seed=42)


def pipeline_artifacts(root: Path, monkeypatch) -> dict:
    root.mkdir()
    monkeypatch.chdir(root)
    Path("config.json").write_text(json.dumps(CONFIG_7.to_dict()))
    window = str(CONFIG_7.window)
    steps = [
        ["synth", "--config", "config.json", "--out", "synth"],
        ["ingest-charts", "--input", "synth/charts.csv", "--out", "labels", "--window", window],
        ["ingest-scrobbles", "--input", "synth/scrobbles.csv", "--out", "clean", "--window", window],
        ["build-features", "--mode", "listening", "--labels", "labels", "--scrobbles", "clean", "--out", "features"],
        ["evaluate", "--dataset", "features", "--k", "5", "--out", "eval"],
    ]
    codes = [main(argv) for argv in steps]
    assert codes == [0] * len(steps), codes
    out = {}
    for p in sorted(Path(".").rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if p.name == "manifest.json":
                doc = json.loads(data)
                doc.pop("created_at")
                data = json.dumps(doc, sort_keys=True).encode()
            out[str(p)] = data
    return out


def test_c7_determinism_and_roundtrip(capsys, tmp_path, monkeypatch):
    a = pipeline_artifacts(tmp_path / "a", monkeypatch)
    b = pipeline_artifacts(tmp_path / "b", monkeypatch)
    differing = sorted(k for k in a.keys() | b.keys() if a.get(k) != b.get(k))
    summaries = [json.loads(a["labels/summary.json"]), json.loads(a["clean/cleaning.json"])]
    rejects = sum(s["rejected"] for s in summaries)
    reject_lines = sum(len(a[f].decode().splitlines()) - 1 for f in ("labels/rejects.csv", "clean/rejects.csv"))
    ok = not differing and rejects == 0 and reject_lines == 0
    verdict(capsys, "C7 determinism/round-trip", ok,
            f"{len(a)} artifacts, {len(differing)} differ {differing[:3]}, {rejects} ingest rejects")


# --------------------------------------------------------------------------
# 8. normalization properties


def fuzz_string(rng):
    pieces = []
    for _ in range(rng.randint(1, 8)):
        r = rng.random()
        if r < 0.3:
            pieces.append("".join(rng.choice("abcdefXYZ0123") for _ in range(rng.randint(1, 6))))
        elif r < 0.45:
            pieces.append(rng.choice(sorted(DEFAULT_FEATURING_TOKENS)))
        elif r < 0.6:
            pieces.append(rng.choice(["&", "!", "(", ")", "'", ".", ",", "-", "/", "’", "¿"]))
        elif r < 0.75:
            pieces.append(rng.choice(["é", "ß", "İ", "ı", "Ǆ", "ﬁ", "Ω", "ｆ", "Ⅻ", "ǅ", "ς", "Σ"]))
        else:
            cp = rng.randrange(0x20, 0x30000)
            while 0xD800 <= cp <= 0xDFFF:
                cp = rng.randrange(0x20, 0x30000)
            pieces.append(chr(cp))
    return rng.choice([" ", "  ", "\t", ""]).join(pieces)


def norm(s):
    try:
        return normalize_text(s)
    except EmptyTextError:
        return None


def test_c8_normalization_properties(capsys):
    t0 = time.perf_counter()
    rng = random.Random(8)
    tokens = sorted(DEFAULT_FEATURING_TOKENS)
    failures = {"idempotence": 0, "case": 0, "featuring": 0}
    for _ in range(10_000):
        s = fuzz_string(rng)
        out = norm(s)
        if out is not None and normalize_text(out) != out:
            failures["idempotence"] += 1
        if not (out == norm(s.upper()) == norm(s.lower())):
            failures["case"] += 1
        left, right = fuzz_string(rng), fuzz_string(rng)
        a, b = rng.choice(tokens), rng.choice(tokens)
        if norm(f"{left} {a} {right}") != norm(f"{left} {b.upper()} {right}"):
            failures["featuring"] += 1
    elapsed = time.perf_counter() - t0
    ok = not any(failures.values()) and elapsed < 5
    verdict(capsys, "C8 normalization", ok, f"failures {failures} over 10000 strings, {elapsed:.2f}s")


# --------------------------------------------------------------------------
# 9. hand oracles


def h2(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_c9_hand_oracles(capsys):
    errors = {}

    # Gaussian NB on a 4-row, 2-feature dataset, computed with plain floats
    X = [[1.0, 2.0], [2.0, 0.0], [3.0, 5.0], [5.0, 1.0]]
    y = [0, 0, 1, 1]
    x = [2.5, 3.0]
    cols = list(zip(*X))
    mu = [sum(c) / 4 for c in cols]
    sd = [math.sqrt(sum((v - m) ** 2 for v in c) / 4) for c, m in zip(cols, mu)]
    Z = [[(r[j] - mu[j]) / sd[j] for j in range(2)] for r in X]
    z = [(x[j] - mu[j]) / sd[j] for j in range(2)]
    joint = []
    for cls in (0, 1):
        rows = [Z[i] for i in range(4) if y[i] == cls]
        total = math.log(len(rows) / 4)
        for j in range(2):
            m = sum(r[j] for r in rows) / len(rows)
            v = sum((r[j] - m) ** 2 for r in rows) / len(rows)
            total += -0.5 * math.log(2 * math.pi * v) - (z[j] - m) ** 2 / (2 * v)
        joint.append(total)
    expected_nb = 1 / (1 + math.exp(joint[0] - joint[1]))
    model = train(ModelSpec("naive_bayes"), make_dataset(X, y))
    errors["nb_posterior"] = abs(score(model, x) - expected_nb)

    # entropy and gain ratio: 6 rows, left {1, 1}, right {0, 1, 0, 0}
    errors["entropy_half"] = abs(float(entropy(5, 10)) - 1.0)
    expected_gr = (h2(3 / 6) - (2 / 6) * h2(1.0) - (4 / 6) * h2(1 / 4)) / h2(2 / 6)
    errors["gain_ratio"] = abs(float(gain_ratio(3, 6, 2, 2)) - expected_gr)

    # FOIL gain: P=4, N=4, condition covers p=3, n=0
    errors["foil_gain"] = abs(float(foil_gain(3, 0, 4, 4)) - 3.0)

    worst = max(errors.values())
    verdict(capsys, "C9 hand oracles", worst <= 1e-12,
            ", ".join(f"{k} {v:.1e}" for k, v in errors.items()))
