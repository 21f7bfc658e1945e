"""End-to-end acceptance suite.

Each test exercises one numbered claim about the toolkit at a pinned
tolerance and prints a single PASS/FAIL line (bypassing capture) so the
full run reads as a checklist. Heavier criteria re-use the calibrated
configurations documented in the project notes.
"""

import subprocess
import sys
import time
from collections import deque

import numpy as np
import pytest

from driftstream.core import LabeledSample, SeededRng, StreamMeta
from driftstream.evaluation import detector_carrier_run, risk_check
from driftstream.generators import (
    ConceptStream,
    DriftSchedule,
    MixedGenerator,
    SeaGenerator,
    make_stream,
)
from driftstream.kswin import KswinConfig, KswinDetector, ks_statistic, ks_threshold
from driftstream.reactive import RrslvqModel
from driftstream.rslvq import RslvqConfig, RslvqModel


@pytest.fixture
def announce(capsys):
    def _announce(num, name, ok, detail=""):
        tail = f" — {detail}" if detail else ""
        with capsys.disabled():
            print(f"\n[ACCEPTANCE {num:02d}] {name}: {'PASS' if ok else 'FAIL'}{tail}")
        assert ok, f"criterion {num:02d} {name}: {detail}"
    return _announce


def oracle_ks(a, b):
    """Counting definition of the two-sample statistic, vectorized."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pooled = np.concatenate([a, b])
    fa = (a[:, None] <= pooled[None, :]).mean(axis=0)
    fb = (b[:, None] <= pooled[None, :]).mean(axis=0)
    return float(np.abs(fa - fb).max())


def test_c01_ks_oracle_equivalence(announce):
    rng = SeededRng(101)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        na, nb = rng.randint(2, 50), rng.randint(2, 50)
        style = rng.randint(0, 2)
        if style == 0:
            a, b = rng.normal(size=na), rng.normal(size=nb)
        elif style == 1:  # heavy ties
            a = rng.gen.integers(0, 5, size=na).astype(float)
            b = rng.gen.integers(0, 5, size=nb).astype(float)
        else:
            a, b = rng.uniform(size=na) * 100, rng.uniform(size=nb) * 100
        if ks_statistic(a, b) != oracle_ks(a, b):
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 5.0
    announce(1, "ks-oracle-equivalence", ok,
             f"{1000 - mismatches}/1000 exact, {elapsed:.1f}s")


def test_c02_threshold_formula(announce):
    value = ks_threshold(0.0001, 30)
    exact = abs(value - 0.554086) <= 1e-6
    alphas = np.logspace(-6, -0.3, 20)
    rs = np.linspace(5, 100, 20).astype(int)
    mono = True
    for r in rs:
        vals = [ks_threshold(float(al), int(r)) for al in alphas]
        mono &= all(x > y for x, y in zip(vals, vals[1:]))
    for al in alphas:
        vals = [ks_threshold(float(al), int(r)) for r in rs]
        mono &= all(x > y for x, y in zip(vals, vals[1:]))
    announce(2, "threshold-formula", exact and mono,
             f"value={value:.6f}, monotone on 20x20 grid: {mono}")


def test_c03_detector_power(announce):
    start = time.perf_counter()
    drift_t, horizon = 5000, 300
    detected = 0
    delays = []
    for seed in range(100):
        rng = SeededRng(300 + seed)
        det = KswinDetector(1, KswinConfig(), seed=10_000 + seed)
        hit = None
        for t in range(drift_t + horizon + 1):
            mean = 0.0 if t < drift_t else 2.0
            sig = det.update(LabeledSample(np.array([rng.normal(mean, 1.0)]), 0))
            if sig is not None and sig.detected and t >= drift_t:
                hit = t
                break
        if hit is not None:
            detected += 1
            delays.append(hit - drift_t)
    elapsed = time.perf_counter() - start
    ok = detected >= 95 and elapsed < 30.0
    announce(3, "detector-power", ok,
             f"{detected}/100 within {horizon}, median delay "
             f"{int(np.median(delays)) if delays else '-'}, {elapsed:.1f}s")


def test_c04_false_positive_discipline(announce):
    rng = SeededRng(404)
    det = KswinDetector(3, KswinConfig(), seed=44)
    flags = 0
    for _ in range(50_000):
        sig = det.update(LabeledSample(rng.uniform(size=3), 0))
        flags += bool(sig is not None and sig.detected)
    rate = flags / 50_000
    announce(4, "false-positive-discipline", rate <= 0.10,
             f"{flags} flagged steps ({rate:.4%})")


def test_c05_detector_carrier_gap(announce):
    start = time.perf_counter()

    def run(with_detector):
        stream = make_stream({"generator": "mixed", "drift": "abrupt",
                              "position": 50_000}, seed=505)
        det = KswinDetector(4, KswinConfig(), seed=55) if with_detector else None
        return detector_carrier_run(stream, det, max_t=100_000, cadence=10_000)

    carrier = run(True)[-1].accuracy
    plain = run(False)[-1].accuracy
    elapsed = time.perf_counter() - start
    ok = carrier >= 0.75 and carrier - plain >= 0.15 and elapsed < 120.0
    announce(5, "detector-carrier-gap", ok,
             f"carrier={carrier:.4f}, plain NB={plain:.4f}, {elapsed:.0f}s")


MIXED_RA = {"generator": "mixed", "drift": "frequent_reoccurring_abrupt",
            "position": 2000, "period": 1000}
REACTIVE_ALPHA = 0.01  # detection on label-reversal streams is trigger-rate driven


def test_c06_rrslvq_vs_rslvq(announce):
    start = time.perf_counter()
    acc_re, acc_plain = [], []
    for seed in range(10):
        for reactive in (True, False):
            stream = make_stream(MIXED_RA, seed=600 + seed)
            if reactive:
                model = RrslvqModel(stream.meta, RslvqConfig(),
                                    KswinConfig(alpha=REACTIVE_ALPHA), seed=seed)
            else:
                model = RslvqModel(stream.meta, RslvqConfig(), SeededRng(seed).child(0))
            correct = 0
            for _ in range(100_000):
                s, _ = stream.next_sample()
                correct += model.predict(s.x) == s.y
                model.learn_one(s)
            (acc_re if reactive else acc_plain).append(correct / 100_000)
    elapsed = time.perf_counter() - start
    m_re, m_plain = float(np.mean(acc_re)), float(np.mean(acc_plain))
    ok = m_re >= m_plain + 0.02 and m_re >= 0.70 and elapsed < 300.0
    announce(6, "rrslvq-vs-rslvq", ok,
             f"rrslvq={m_re:.4f}, rslvq={m_plain:.4f} over 10 seeds, {elapsed:.0f}s")


def test_c07_recovery_stability(announce):
    # Wider kernel and larger stability constant so the plain baseline
    # reliably learns the pre-drift concept; at the package defaults its
    # cold-start is bimodal across seeds and the comparison is vacuous for
    # seeds that never leave chance level.
    cfg = dict(sigma=2.5, epsilon=1e-2)
    drift_t, end_t, span = 15_000, 19_000, 200
    budget = 1000
    re_ok = longer_ok = 0
    for seed in range(10):
        recoveries = {}
        for reactive in (True, False):
            stream = make_stream({"generator": "mixed", "drift": "abrupt",
                                  "position": drift_t}, seed=700 + seed)
            if reactive:
                model = RrslvqModel(stream.meta, RslvqConfig(**cfg),
                                    KswinConfig(alpha=REACTIVE_ALPHA), seed=seed)
            else:
                model = RslvqModel(stream.meta, RslvqConfig(**cfg),
                                   SeededRng(seed).child(0))
            recent = deque(maxlen=span)
            plateau_obs, recovery = [], None
            for t in range(end_t):
                s, _ = stream.next_sample()
                recent.append(model.predict(s.x) == s.y)
                model.learn_one(s)
                if drift_t - 1000 <= t < drift_t:
                    plateau_obs.append(sum(recent) / len(recent))
                if t >= drift_t + span and recovery is None:
                    if sum(recent) / len(recent) >= np.mean(plateau_obs) - 0.05:
                        recovery = t - drift_t
            recoveries[reactive] = recovery if recovery is not None else float("inf")
        re_ok += recoveries[True] <= budget
        longer_ok += recoveries[False] > recoveries[True]
    ok = re_ok >= 8 and longer_ok >= 8
    announce(7, "recovery-stability", ok,
             f"rrslvq within {budget}: {re_ok}/10, rslvq strictly slower: {longer_ok}/10")


def test_c08_risk_check_ordering(announce):
    class _Fixed:
        def __init__(self, gen, concept):
            self.gen, self.concept, self.meta = gen, concept, gen.meta

        @property
        def has_drift_truth(self):
            return False

        def next_sample(self):
            return self.gen.emit(self.concept), False

    ordered = 0
    stales = []
    for seed in range(20):
        gen = MixedGenerator(SeededRng(800 + seed).child(0))
        a, b = _Fixed(gen, 0), _Fixed(gen, 1)
        model = RrslvqModel(a.meta, RslvqConfig(), KswinConfig(alpha=1e-12), seed=seed)
        for _ in range(5000):
            s, _ = a.next_sample()
            model.process(s)
        rec = risk_check(a, b, model, k=5000)
        ordered += rec.err_adapted < rec.err_stale
        stales.append(rec.err_stale)
    mean_stale = float(np.mean(stales))
    ok = ordered >= 18 and mean_stale >= 0.45
    announce(8, "risk-check-ordering", ok,
             f"adapted<stale in {ordered}/20 seeds, mean err_stale={mean_stale:.3f}")


def test_c09_footprint_constancy(announce):
    stream = make_stream({"generator": "sea"}, seed=909)
    model = RrslvqModel(stream.meta, RslvqConfig(),
                        KswinConfig(alpha=REACTIVE_ALPHA), seed=9)
    expected = stream.meta.d * (model.classifier.m + model.kswin_cfg.n)
    checkpoints = {}
    for t in range(1, 50_001):
        s, _ = stream.next_sample()
        model.process(s)
        if t in (1000, 10_000, 50_000):
            checkpoints[t] = model.footprint()
    ok = set(checkpoints.values()) == {expected}
    announce(9, "footprint-constancy", ok,
             f"d(m+n)={expected}, checkpoints={checkpoints}")


def test_c10_linear_time(announce):
    stream = make_stream({"generator": "sea"}, seed=1010)
    model = RrslvqModel(stream.meta, RslvqConfig(), KswinConfig(), seed=10)
    ts, cumulative = [], []
    start = time.perf_counter()
    for t in range(1, 100_001):
        s, _ = stream.next_sample()
        model.process(s)
        if t % 2000 == 0:
            ts.append(t)
            cumulative.append(time.perf_counter() - start)
    ts = np.array(ts, dtype=float)
    y = np.array(cumulative)
    slope, intercept = np.polyfit(ts, y, 1)
    resid = y - (slope * ts + intercept)
    r2 = 1.0 - float((resid**2).sum() / ((y - y.mean()) ** 2).sum())
    announce(10, "linear-time", r2 > 0.99, f"R^2={r2:.5f} over 100k samples")


def test_c11_classifier_unit_properties(announce):
    rng = SeededRng(1111)
    norm_ok = signs_ok = brute_ok = sigma_ok = True
    # posterior normalization, random models up to m=20, d=10
    for _ in range(200):
        C = rng.randint(2, 4)
        ppc = rng.randint(1, 5)
        d = rng.randint(1, 10)
        model = RslvqModel(StreamMeta(d=d, C=C),
                           RslvqConfig(prototypes_per_class=ppc), rng.child(rng.randint(0, 10**6)))
        x = rng.normal(size=d) * 5
        norm_ok &= abs(model.posterior(x).sum() - 1.0) <= 1e-12
    # attraction/repulsion signs on 10,000 (model, sample) draws
    models = [RslvqModel(StreamMeta(d=3, C=2), RslvqConfig(prototypes_per_class=2),
                         SeededRng(2000 + i).child(0)) for i in range(100)]
    for i, model in enumerate(models):
        for _ in range(100):
            x = rng.normal(size=3) * 3
            yl = rng.randint(0, 1)
            g = model.gradient(x, yl)
            diff = x - model.thetas
            along = np.einsum("ij,ij->i", -g, diff)
            correct = model.labels == yl
            signs_ok &= bool(np.all(along[correct] >= 0) and np.all(along[~correct] <= 0))
    # predict vs brute force, 1,000 queries; sigma invariance alongside
    model = RslvqModel(StreamMeta(d=4, C=3), RslvqConfig(prototypes_per_class=3),
                       SeededRng(3003).child(0))
    wide = RslvqModel(StreamMeta(d=4, C=3),
                      RslvqConfig(prototypes_per_class=3, sigma=7.5), SeededRng(1).child(0))
    wide.thetas = model.thetas.copy()
    wide.labels = model.labels.copy()
    for _ in range(1000):
        x = rng.normal(size=4) * 4
        dists = [float(((x - model.thetas[j]) ** 2).sum()) for j in range(model.m)]
        brute = int(model.labels[int(np.argmin(dists))])
        brute_ok &= model.predict(x) == brute
        sigma_ok &= wide.predict(x) == model.predict(x)
    ok = norm_ok and signs_ok and brute_ok and sigma_ok
    announce(11, "classifier-unit-properties", ok,
             f"normalization={norm_ok}, signs={signs_ok}, "
             f"brute-force={brute_ok}, sigma-invariance={sigma_ok}")


def test_c12_generator_statistics(announce):
    sea = SeaGenerator(SeededRng(1212).child(0), noise=0.0, blocks=(1,))
    sea_rate = float(np.mean([sea.emit(0).y for _ in range(100_000)]))
    sea_ok = abs(sea_rate - 0.32) <= 0.02

    mixed = MixedGenerator(SeededRng(1213).child(0))
    mixed_rate = float(np.mean([mixed.emit(0).y for _ in range(100_000)]))
    mixed_ok = abs(mixed_rate - 0.5) <= 0.02

    hits = 0
    sched = DriftSchedule(kind="gradual", position=3, width=10)
    for seed in range(10_000):
        stream = ConceptStream(MixedGenerator(SeededRng(seed).child(0)), sched,
                               SeededRng(seed).child(1))
        twin = MixedGenerator(SeededRng(seed).child(0))
        for _ in range(4):
            s, _ = stream.next_sample()
            ref = twin.emit(0)
        hits += s.y != ref.y
    grad_frac = hits / 10_000
    grad_ok = abs(grad_frac - 0.5) <= 0.03

    ok = sea_ok and mixed_ok and grad_ok
    announce(12, "generator-statistics", ok,
             f"sea={sea_rate:.4f} (band 0.32±0.02: {sea_ok}), "
             f"mixed={mixed_rate:.4f} (band 0.5±0.02: {mixed_ok}; the two-of-three "
             f"rule with boundary 0.5+0.3*sin(3*pi*x) has analytic positive rate "
             f"0.25+0.5*(0.5+0.3*2/(3*pi))=0.5318, so this band is not attainable), "
             f"gradual-at-p={grad_frac:.4f} (band 0.5±0.03: {grad_ok})")


def test_c13_adaptation_identity(announce):
    rng = SeededRng(1313)
    model = RrslvqModel(StreamMeta(d=5, C=3),
                        RslvqConfig(prototypes_per_class=2), KswinConfig(), seed=13)
    model.classifier.learn_one = lambda s: None  # freeze the retraining pass
    rx = rng.normal(size=(30, 5)) * 3
    ry = rng.gen.integers(0, 3, size=30)
    model.adapt(rx, ry)
    mean = rx.mean(axis=0)
    ok = all(np.array_equal(model.classifier.thetas[j], mean)
             for j in range(model.classifier.m))
    announce(13, "adaptation-identity", ok, "all prototypes equal mean(R) exactly")


def test_c14_cli_determinism(announce, tmp_path):
    out = tmp_path / "results.csv"
    manifest = tmp_path / "exp.toml"
    manifest.write_text(f"""
seeds = [1, 2, 3]
max_t = 500
out = "{out}"

[[streams]]
generator = "mixed"
name = "mixed_ra"
drift = "frequent_reoccurring_abrupt"
position = 100
period = 100

[[learners]]
kind = "rrslvq"
name = "rrslvq"
alpha = 0.01

[[learners]]
kind = "naive_bayes"
name = "nb"
""")

    def invoke(jobs):
        cmd = [sys.executable, "-m", "driftstream.cli", "run",
               "--config", str(manifest), "--no-timing", "--jobs", str(jobs)]
        res = subprocess.run(cmd, capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        return out.read_bytes()

    first = invoke(1)
    second = invoke(1)
    parallel = invoke(4)
    ok = first == second and first == parallel
    announce(14, "cli-determinism", ok,
             f"rerun identical: {first == second}, jobs 1 vs 4 identical: {first == parallel}")
