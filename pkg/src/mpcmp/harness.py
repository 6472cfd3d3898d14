"""Plaintext oracles and the verification suites built on them.

The oracles use integer arithmetic only. Each suite runs the protocols end to
end on the simulated fabric with an in-memory dealer, compares against the
oracles, and returns a :class:`SuiteReport`. Correctness suites shrink their
first counterexample by descending the size parameter and then the inputs.
"""

from __future__ import annotations

import csv
import io
import random
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Sequence

# -- oracles ---------------------------------------------------------------------


def oracle_compare(x: int, R: int) -> int:
    return int(x < R)


def oracle_msb_p(x: int, p: int) -> int:
    return int(x >= p // 2)


def oracle_msb_2k(x: int, k: int) -> int:
    return (x >> (k - 1)) & 1


def oracle_msb_2k_identity(x: int, r: int, k: int) -> tuple[int, tuple[int, int, int]]:
    """MSB(x) and the three terms MSB(x+r), MSB(2^k-r), 1{y0 > 2^(k-1)-y1-1} whose XOR it is."""
    mod, half = 1 << k, 1 << (k - 1)
    xh = (x + r) % mod
    t = (mod - r) % mod
    y0, y1 = xh % half, t % half
    terms = (xh >> (k - 1), t >> (k - 1), int(y0 > half - y1 - 1))
    msb = oracle_msb_2k(x, k)
    assert msb == terms[0] ^ terms[1] ^ terms[2], (x, r, k)
    return msb, terms


def oracle_prefix_and(bits: Sequence[int]) -> list[int]:
    out, acc = [], 1
    for b in bits:
        acc &= b
        out.append(acc)
    return out


def oracle_and(bits: Sequence[int]) -> int:
    return int(all(bits))


def prefix_rounds(k: int, n: int) -> int:
    levels, span = 0, 1
    while span < k:
        span *= n
        levels += 1
    return levels


def msb_2k_rounds(k: int, n: int) -> int:
    return 2 + prefix_rounds(k - 1, n)


@dataclass(frozen=True)
class OracleCase:
    protocol: str
    inputs: Any
    expected: Any
    params: tuple = ()

    def describe(self) -> str:
        ps = " ".join(f"{k}={v}" for k, v in self.params)
        return f"{self.protocol} {ps} inputs={self.inputs} expected={self.expected}"


# -- reports -------------------------------------------------------------------

CSV_FIELDS = ("suite", "cases", "failures", "first_counterexample")


@dataclass
class SuiteReport:
    suite: str
    cases: int = 0
    failures: int = 0
    counterexample: str | None = None
    detail: str = ""
    elapsed_s: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.suite}: {self.cases} cases, {self.failures} failures ({self.elapsed_s:.1f}s)"
        if self.detail:
            text += f"; {self.detail}"
        if self.counterexample:
            text += f"; first counterexample: {self.counterexample}"
        return text

    def row(self) -> dict:
        return {
            "suite": self.suite,
            "cases": self.cases,
            "failures": self.failures,
            "first_counterexample": self.counterexample or "",
        }

    def fail(self, what: str) -> None:
        self.failures += 1
        if self.counterexample is None:
            self.counterexample = what


def reports_csv(reports: Iterable[SuiteReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


# -- execution helpers -----------------------------------------------------------


def _session():
    # imported lazily so the oracles above stay free of protocol code
    from . import session

    return session


def _run_batch(params, inputs, seed, chunk: int = 250) -> list:
    sess = _session()
    out = []
    for start in range(0, len(inputs), chunk):
        part = inputs[start:start + chunk]
        out.extend(sess.run(params, part, seed=f"{seed}:{start}").outputs)
    return out


def _minimize(failing: Callable[[dict], bool], case: dict, shrinks: Callable[[dict], Iterable[dict]], limit: int = 200) -> dict:
    """Greedy descent: move to the first smaller candidate that still fails."""
    for _ in range(limit):
        for cand in shrinks(case):
            if failing(cand):
                case = cand
                break
        else:
            return case
    return case


def _check_cases(report: SuiteReport, groups, budget: int | None, single: Callable[[Any, Any], Any], shrinks) -> None:
    """Run grouped oracle cases; ``groups`` yields (params, [OracleCase])."""
    remaining = budget
    for params, cases in groups:
        if remaining is not None:
            cases = cases[:remaining]
            remaining -= len(cases)
        if not cases:
            continue
        got = _run_batch(params, [c.inputs for c in cases], seed=f"{report.suite}:{params}")
        report.cases += len(cases)
        for c, g in zip(cases, got):
            if g != c.expected:
                first = report.counterexample is None
                report.fail(c.describe() + f" got={g}")
                if first:
                    start = {"params": params, "case": c}
                    small = _minimize(lambda s: single(s["params"], s["case"]) != s["case"].expected, start, shrinks)
                    report.counterexample = small["case"].describe() + " (minimized)"
        if remaining == 0:
            break


# -- suites ----------------------------------------------------------------------


def suite_ltbits_p(budget=None, primes=(13, 61), ells=range(1, 6), modes=(False, True), parties=3) -> SuiteReport:
    sess = _session()
    report = SuiteReport("ltbits_p_exhaustive")

    def groups():
        for active in modes:
            for p in primes:
                for ell in ells:
                    cases = [
                        OracleCase("ltbits_p", (x, R), oracle_compare(x, R), (("p", p), ("ell", ell), ("active", active)))
                        for x in range(1 << ell)
                        for R in range(1 << ell)
                    ]
                    yield sess.Params("ltbits_p", parties, active, p=p, ell=ell), cases

    def single(params, case):
        return sess.run(params, [case.inputs], seed=0).outputs[0]

    def shrinks(state):
        params, case = state["params"], state["case"]
        x, R = case.inputs
        ell = params.ell
        out = []
        if ell > 1:
            m = (1 << (ell - 1)) - 1
            x2, R2 = x & m, R & m
            out.append((replace(params, ell=ell - 1), (x2, R2)))
        if x:
            out.append((params, (x - 1, R)))
        if R:
            out.append((params, (x, R - 1)))
        return [
            {"params": p, "case": OracleCase("ltbits_p", i, oracle_compare(*i), (("p", p.p), ("ell", p.ell), ("active", p.active)))}
            for p, i in out
        ]

    _check_cases(report, groups(), budget, single, shrinks)
    return report


def suite_ltbits_2n(budget=None, ells=range(1, 7), branches=(2, 3, 4, 8), active=False, parties=3) -> SuiteReport:
    sess = _session()
    report = SuiteReport("ltbits_2n_exhaustive")

    def groups():
        for n in branches:
            for ell in ells:
                cases = [
                    OracleCase("ltbits_2n", (x, R), oracle_compare(x, R), (("ell", ell), ("n", n)))
                    for x in range(1 << ell)
                    for R in range(1 << ell)
                ]
                yield sess.Params("ltbits_2n", parties, active, ell=ell, n_branch=n), cases

    def single(params, case):
        return sess.run(params, [case.inputs], seed=0).outputs[0]

    def shrinks(state):
        params, case = state["params"], state["case"]
        x, R = case.inputs
        out = []
        if params.ell > 1:
            m = (1 << (params.ell - 1)) - 1
            out.append((replace(params, ell=params.ell - 1), (x & m, R & m)))
        if x:
            out.append((params, (x - 1, R)))
        if R:
            out.append((params, (x, R - 1)))
        return [
            {"params": p, "case": OracleCase("ltbits_2n", i, oracle_compare(*i), (("ell", p.ell), ("n", p.n_branch)))}
            for p, i in out
        ]

    _check_cases(report, groups(), budget, single, shrinks)
    return report


def suite_msb_p(budget=None, primes=(13, 61), tapes_per_x=32, large_prime=65521, large_count=1000, active=False, parties=3, seed=7) -> SuiteReport:
    sess = _session()
    report = SuiteReport("msb_p")
    rng = random.Random(seed)

    def groups():
        for p in primes:
            cases = [
                OracleCase("msb_p", x, oracle_msb_p(x, p), (("p", p),))
                for x in range(p)
                for _ in range(tapes_per_x)
            ]
            yield sess.Params("msb_p", parties, active, p=p), cases
        if large_prime and large_count:
            xs = [rng.randrange(large_prime) for _ in range(large_count)]
            yield sess.Params("msb_p", parties, active, p=large_prime), [
                OracleCase("msb_p", x, oracle_msb_p(x, large_prime), (("p", large_prime),)) for x in xs
            ]

    def single(params, case):
        return sess.run(params, [case.inputs], seed=0).outputs[0]

    def shrinks(state):
        params, case = state["params"], state["case"]
        if case.inputs == 0:
            return []
        x = case.inputs - 1
        return [{"params": params, "case": OracleCase("msb_p", x, oracle_msb_p(x, params.p), case.params)}]

    _check_cases(report, groups(), budget, single, shrinks)
    return report


def suite_msb_2k(budget=None, identity_k=6, ks=(6, 32, 64), branches=(2, 5, 8), count=1000, active=False, parties=3, seed=11) -> SuiteReport:
    sess = _session()
    report = SuiteReport("msb_2k")
    remaining = budget
    # the identity behind the protocol, over every (x, r)
    if identity_k:
        for x in range(1 << identity_k):
            for r in range(1 << identity_k):
                if remaining == 0:
                    break
                msb, terms = oracle_msb_2k_identity(x, r, identity_k)
                report.cases += 1
                if remaining is not None:
                    remaining -= 1
                if msb != terms[0] ^ terms[1] ^ terms[2]:
                    report.fail(f"identity x={x} r={r} k={identity_k}")
    rng = random.Random(seed)

    def groups():
        for k in ks:
            for n in branches:
                xs = [rng.getrandbits(k) for _ in range(count)]
                yield sess.Params("msb_2k", parties, active, k=k, n_branch=n), [
                    OracleCase("msb_2k", x, oracle_msb_2k(x, k), (("k", k), ("n", n))) for x in xs
                ]

    def single(params, case):
        return sess.run(params, [case.inputs], seed=0).outputs[0]

    def shrinks(state):
        params, case = state["params"], state["case"]
        out = []
        if params.k > 2:
            k = params.k - 1
            x = case.inputs % (1 << k)
            p2 = replace(params, k=k)
            out.append({"params": p2, "case": OracleCase("msb_2k", x, oracle_msb_2k(x, k), (("k", k), ("n", params.n_branch)))})
        if case.inputs:
            x = case.inputs - 1
            out.append({"params": params, "case": OracleCase("msb_2k", x, oracle_msb_2k(x, params.k), case.params)})
        return out

    _check_cases(report, groups(), remaining, single, shrinks)
    return report


def suite_round_counts(
    budget=None,
    primes=(13, 61, 65521, 2**31 - 1),
    ks=(6, 16, 32, 64),
    branches=range(2, 11),
    prefix_lengths=(2, 3, 7, 8, 9, 16, 31, 63, 64),
    parties=3,
) -> SuiteReport:
    """Online rounds of passive runs against the closed forms."""
    sess = _session()
    report = SuiteReport("round_counts")
    checks: list[tuple[str, Callable[[], int], int]] = []
    for p in primes:
        checks.append((f"msb_p p={p}", lambda p=p: sess.run(sess.Params("msb_p", parties, p=p), [p // 3], seed=1).report.rounds, 2))
    for k in ks:
        for n in branches:
            checks.append((
                f"msb_2k k={k} n={n}",
                lambda k=k, n=n: sess.run(sess.Params("msb_2k", parties, k=k, n_branch=n), [k], seed=1).report.rounds,
                msb_2k_rounds(k, n),
            ))
    for k in prefix_lengths:
        for n in branches:
            checks.append((
                f"prefix_and k={k} n={n}",
                lambda k=k, n=n: sess.run(sess.Params("prefix_and", parties, ell=k, n_branch=n), [[1] * k], seed=1).report.rounds,
                prefix_rounds(k, n),
            ))
    if budget is not None:
        checks = checks[:budget]
    for name, measure, expected in checks:
        got = measure()
        report.cases += 1
        if got != expected:
            report.fail(f"{name}: rounds {got}, expected {expected}")
    return report


def suite_communication(budget=None, primes=(13, 61, 65521), ells=range(1, 9), arities=range(2, 13), parties=3) -> SuiteReport:
    """Opened elements per comparison and AND-tape subset counts."""
    sess = _session()
    from .dealer import Dealer

    report = SuiteReport("communication")
    checks = []
    for p in primes:
        for ell in ells:
            if p <= ell + 1:
                continue
            checks.append(("ltbits_p", p, ell))
    for m in arities:
        checks.append(("and", m, None))
    if budget is not None:
        checks = checks[:budget]
    for kind, a, b in checks:
        report.cases += 1
        if kind == "ltbits_p":
            p, ell = a, b
            out = sess.run(sess.Params("ltbits_p", parties, p=p, ell=ell), [(0, 1)], seed=3)
            elem = 8
            want_bytes = ell * elem * (parties - 1)
            if out.opened_elements != ell or out.report.bytes_sent_per_party != want_bytes:
                report.fail(
                    f"ltbits_p p={p} l={ell}: opened {out.opened_elements}, bytes {out.report.bytes_sent_per_party}; "
                    f"expected {ell}, {want_bytes}"
                )
        else:
            m = a
            tapes, _ = Dealer(parties, False, random.Random(m)).gen_and_tape(m, [0] * m)
            sizes = {len(t.subsets) for t in tapes}
            if sizes != {2**m - 1} or any(len(t.eps) != m for t in tapes):
                report.fail(f"and m={m}: subset shares {sorted(sizes)}, expected {2**m - 1}")
    return report


def suite_branching_wan(budget=None, k=32, branches=range(2, 11), parties=3, threshold=1.5) -> SuiteReport:
    """Modeled WAN time of msb_2k for each n against n = 2, batch of one."""
    sess = _session()
    from .transport import WAN

    report = SuiteReport("branching_wan")
    times = {}
    for n in list(branches)[: budget if budget is not None else None]:
        out = sess.run(sess.Params("msb_2k", parties, k=k, n_branch=n), [12345 % (1 << k)], seed=5)
        times[n] = out.report.under(WAN).modeled_ms
        report.cases += 1
    if not times or 2 not in times:
        return report
    best = min(times, key=times.get)
    ratio = times[2] / times[best]
    report.detail = f"n=2 {times[2]:.1f} ms, best n={best} {times[best]:.1f} ms, ratio {ratio:.2f}"
    if ratio < threshold:
        report.fail(f"ratio {ratio:.3f} below {threshold}")
    return report


def _tamper_configs(sess):
    return [
        (sess.Params("ltbits_p", 3, True, p=61, ell=4), lambda r: [(r.randrange(16), r.randrange(16))]),
        (sess.Params("ltbits_p", 3, True, p=13, ell=3), lambda r: [(r.randrange(8), r.randrange(8))]),
        (sess.Params("ltbits_2n", 3, True, ell=5, n_branch=3), lambda r: [(r.randrange(32), r.randrange(32))]),
        (sess.Params("prefix_and", 3, True, ell=7, n_branch=2), lambda r: [[r.getrandbits(1) | (r.random() < 0.7) for _ in range(7)]]),
        (sess.Params("and_m", 3, True, ell=4), lambda r: [[r.getrandbits(1) for _ in range(4)]]),
        (sess.Params("msb_p", 3, True, p=61), lambda r: [r.randrange(61)]),
        (sess.Params("msb_p", 3, True, p=13), lambda r: [r.randrange(13)]),
        (sess.Params("msb_2k", 3, True, k=16, n_branch=3), lambda r: [r.getrandbits(16)]),
        (sess.Params("msb_2k", 3, True, k=32, n_branch=2, s=32), lambda r: [r.getrandbits(32)]),
    ]


def suite_tamper(budget=None, tampers=1000, honest=1000, seed=13) -> SuiteReport:
    """Single-share tampering must always abort; honest active runs never."""
    from .abb import Tamper
    from .errors import Abort

    sess = _session()
    report = SuiteReport("tamper")
    rng = random.Random(seed)
    configs = _tamper_configs(sess)
    if budget is not None:
        tampers = min(tampers, budget)
        honest = min(honest, max(0, budget - tampers))
    detected = 0
    for i in range(tampers):
        params, make = configs[i % len(configs)]
        inputs = make(rng)
        dry = sess.run(params, inputs, seed=f"t{i}")
        tamper = Tamper(rng.randrange(dry.opens), rng.randrange(1 << 16), rng.randrange(1, 1 << 8))
        party = rng.randrange(params.n_parties)
        report.cases += 1
        try:
            sess.run(params, inputs, seed=f"t{i}", tamper=(party, tamper))
        except Abort:
            detected += 1
        else:
            report.fail(f"{params.protocol} inputs={inputs} party={party} {tamper} not detected")
    false_aborts = 0
    for i in range(honest):
        params, make = configs[i % len(configs)]
        inputs = make(rng)
        report.cases += 1
        try:
            sess.run(params, inputs, seed=f"h{i}")
        except Abort:
            false_aborts += 1
            report.fail(f"honest {params.protocol} inputs={inputs} aborted")
    rate = 100.0 * detected / tampers if tampers else 100.0
    report.detail = f"detected {detected}/{tampers} ({rate:.1f}%), honest aborts {false_aborts}/{honest}"
    return report


def suite_uniformity(budget=None, samples=10_000, p=13, ell=3, x=5, R=3, k=6, x_ring=37, alpha=0.001, parties=3) -> SuiteReport:
    """Chi-square test of every opened symbol across fresh tapes with a fixed input."""
    from scipy.stats import chisquare

    sess = _session()
    report = SuiteReport("uniformity")
    if budget is not None:
        samples = min(samples, budget)
    if samples == 0:
        return report

    worst = []
    # ltbits_p: the l opened values d_i = c_i - r_i, in its only open round
    params = sess.Params("ltbits_p", parties, p=p, ell=ell)
    counts = [[0] * p for _ in range(ell)]
    for start in range(0, samples, 2500):
        n = min(2500, samples - start)
        out = sess.run(params, [(x, R)] * n, seed=f"u{start}")
        opened = _opened_from_transcripts(out, params.field, n * ell)[0]
        for j, v in enumerate(opened):
            counts[j % ell][v] += 1
    for i in range(ell):
        pval = chisquare(counts[i]).pvalue
        worst.append(pval)
        report.cases += 1
        if pval < alpha:
            report.fail(f"ltbits_p d_{i} p-value {pval:.2e}")
    # msb_2k: the opened x_hat, first open round
    params = sess.Params("msb_2k", parties, k=k, n_branch=2)
    bins = [0] * (1 << k)
    for start in range(0, samples, 2500):
        n = min(2500, samples - start)
        out = sess.run(params, [x_ring] * n, seed=f"m{start}")
        for v in _opened_from_transcripts(out, params.ring, n)[0]:
            bins[v] += 1
    pval = chisquare(bins).pvalue
    worst.append(pval)
    report.cases += 1
    if pval < alpha:
        report.fail(f"msb_2k x_hat p-value {pval:.2e}")
    report.detail = f"min p-value {min(worst):.3f} over {len(worst)} symbols, {samples} tapes each"
    return report


def _opened_from_transcripts(outcome, scheme, count: int) -> list[list[int]]:
    """Opened values of every round whose payloads hold ``count`` elements of ``scheme``.

    Summing every party's broadcast share reconstructs the public value.
    """
    by_round: dict[int, dict[int, bytes]] = {}
    for entries in outcome.transcripts:
        for rnd, src, dst, payload in entries:
            by_round.setdefault(rnd, {})[src] = payload
    size = scheme.share.encoded_size(count)
    out = []
    for rnd in sorted(by_round):
        payloads = by_round[rnd]
        if any(len(v) < size for v in payloads.values()):
            continue
        totals = [0] * count
        for data in payloads.values():
            vals = scheme.share.decode(data[:size], count)
            totals = [scheme.share.add(a, b) for a, b in zip(totals, vals)]
        out.append([scheme.plain(v) for v in totals])
    return out


def _equivalence_configs(sess):
    return [
        (sess.Params("ltbits_p", 3, True, p=61, ell=5), [(11, 20), (20, 11)]),
        (sess.Params("ltbits_2n", 3, True, ell=6, n_branch=3), [(11, 20), (40, 39)]),
        (sess.Params("prefix_and", 3, True, ell=9, n_branch=3), [[1, 1, 1, 1, 0, 1, 1, 1, 1]]),
        (sess.Params("and_m", 3, True, ell=5), [[1, 1, 1, 1, 1], [1, 0, 1, 1, 1]]),
        (sess.Params("msb_p", 3, True, p=65521), [3, 40000]),
        (sess.Params("msb_2k", 3, True, k=32, n_branch=4), [5, 2**31 + 9]),
    ]


def suite_fabric_equivalence(budget=None, seed=21) -> SuiteReport:
    """Simulated and TCP fabrics must produce byte-identical transcripts."""
    sess = _session()
    report = SuiteReport("fabric_equivalence")
    configs = _equivalence_configs(sess)
    if budget is not None:
        configs = configs[:budget]
    for params, inputs in configs:
        report.cases += 1
        sim = sess.run(params, inputs, seed=seed, fabric="sim")
        tcp = sess.run(params, inputs, seed=seed, fabric="tcp")
        same = (
            sim.transcripts == tcp.transcripts
            and sim.outputs == tcp.outputs
            and (sim.report.rounds, sim.report.bytes_sent_per_party) == (tcp.report.rounds, tcp.report.bytes_sent_per_party)
        )
        if not same:
            report.fail(f"{params.protocol}: transcripts differ between sim and tcp")
    return report


# criterion number -> suite
SUITES: dict[str, tuple[int, Callable[..., SuiteReport]]] = {
    "ltbits_p_exhaustive": (1, suite_ltbits_p),
    "ltbits_2n_exhaustive": (2, suite_ltbits_2n),
    "msb_p": (3, suite_msb_p),
    "msb_2k": (4, suite_msb_2k),
    "round_counts": (5, suite_round_counts),
    "communication": (6, suite_communication),
    "branching_wan": (7, suite_branching_wan),
    "tamper": (8, suite_tamper),
    "uniformity": (9, suite_uniformity),
    "fabric_equivalence": (10, suite_fabric_equivalence),
}


def run_suite(suite_id: str, budget: int | None = None, **options) -> SuiteReport:
    """Run one suite; ``budget`` caps the number of cases (0 gives an empty report)."""
    if suite_id not in SUITES:
        raise KeyError(f"unknown suite {suite_id!r}; known: {', '.join(SUITES)}")
    if budget is not None and budget <= 0:
        return SuiteReport(suite_id)
    start = time.perf_counter()
    report = SUITES[suite_id][1](budget, **options)
    report.elapsed_s = time.perf_counter() - start
    return report


def run_all(budget: int | None = None, suites: Sequence[str] | None = None) -> list[SuiteReport]:
    return [run_suite(s, budget) for s in (suites or SUITES)]


__all__ = [
    "CSV_FIELDS",
    "OracleCase",
    "SUITES",
    "SuiteReport",
    "msb_2k_rounds",
    "oracle_and",
    "oracle_compare",
    "oracle_msb_2k",
    "oracle_msb_2k_identity",
    "oracle_msb_p",
    "oracle_prefix_and",
    "prefix_rounds",
    "reports_csv",
    "run_all",
    "run_suite",
]
