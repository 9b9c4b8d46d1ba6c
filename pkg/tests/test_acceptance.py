"""Exit criteria.  Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line."""
import time

import numpy as np
import pytest

from _stats import chi_square
from qmnbinom.cli import main
from qmnbinom.distribution import SampleStream, pmf_table, pmf_table_infinite
from qmnbinom.identities import (
    default_grid,
    mc_duality_check,
    s_direct_table,
    s_recurrence_table,
    verify_lemma_recursion,
    verify_recurrence_consistency,
    verify_symmetry,
)
from qmnbinom.processes import OccupationConfig, ParticleConfig, boson_step, tasep_step
from qmnbinom.qseries import DeformParams, q_binomial, q_pochhammer

GRID = default_grid()


@pytest.fixture
def announce(capsys):
    def _announce(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" [{detail}]" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"

    return _announce


def test_1_normalization(announce):
    bad = [
        (p, m)
        for p in GRID
        for m in range(31)
        if sum(pmf_table(p, m).weights) != 1
    ]
    announce(1, "sum_j phi(j|m) = 1 exactly, all grid triples, m <= 30", not bad,
             f"{len(GRID)} triples, {len(bad)} violations")


def test_2_symmetry(announce):
    failures = [r for p in GRID for r in verify_symmetry(p, 12).failures()]
    announce(2, "S[x][y] = S[y][x] exactly, x, y <= 12", not failures,
             f"{len(GRID)} triples, {len(failures)} violations")


def test_3_recurrence(announce):
    failures = [r for p in GRID for r in verify_recurrence_consistency(p, 10).failures()]
    announce(3, "three-term relation holds exactly on termwise S, x, y <= 10", not failures,
             f"{len(failures)} violations")


def test_4_lemma_recursion(announce):
    targets = [p for p in GRID if p.mu > 0 and p.q >= 0]
    checked = 0
    failures = []
    for p in targets:
        report = verify_lemma_recursion(p, 8)
        checked += sum(1 for r in report if not r.note)
        failures += report.failures()
    ok = not failures and checked == len(targets) * 9 * 2
    announce(4, "inductive normalization step holds exactly, m <= 8, mu > 0", ok,
             f"{len(targets)} triples, {checked} records, {len(failures)} violations")


def test_5_route_equivalence(announce):
    mismatched = [
        p for p in GRID if s_recurrence_table(p, 12, 12).values != s_direct_table(p, 12, 12).values
    ]
    announce(5, "recurrence-filled S equals termwise S exactly on x, y <= 12", not mismatched,
             f"{len(mismatched)} mismatching triples")


def test_6_nu_zero_degeneration(announce):
    targets = [p for p in GRID if p.nu == 0]
    bad = 0
    for p in targets:
        q, mu, _ = p.astuple()
        for m in range(21):
            ref = tuple(mu**j * q_pochhammer(mu, q, m - j) * q_binomial(m, j, q) for j in range(m + 1))
            bad += pmf_table(p, m).weights != ref
    announce(6, "nu = 0 weights equal mu^j (mu;q)_{m-j} [m, j]_q exactly, m <= 20", not bad,
             f"{len(targets)} triples, {bad} mismatches")


def test_7_mc_duality(announce):
    start = time.perf_counter()
    report = mc_duality_check(DeformParams("1/2", "1/2", "1/4"), 2, 3, 100_000, seed=0)
    elapsed = time.perf_counter() - start
    detail = "; ".join(f"{r.check_name}={r.lhs:.5f} vs {float(r.rhs):.5f} (3SE {r.tolerance:.5f})" for r in report)
    announce(7, "both Monte Carlo moments within 3 SE of S[2][3], under a minute",
             report.passed and len(report) == 2 and elapsed < 60, f"{detail}; {elapsed:.2f}s")


def test_8_simulator_marginals(announce):
    params = DeformParams(0.5, 0.5, 0.25)
    stream = SampleStream(seed=8)
    config = ParticleConfig((0,))
    jumps = []
    for _ in range(100_000):
        new = tasep_step(config, params, stream)
        jumps.append(new.positions[0] - config.positions[0])
        config = new
    stat, dof, crit = chi_square(jumps, pmf_table_infinite(params).weights)

    ring = OccupationConfig((5, 0, 3, 0, 0, 2, 1, 0, 0, 4))
    total = ring.total
    boson_stream = SampleStream(seed=8)
    conserved = True
    for _ in range(10_000):
        ring = boson_step(ring, params, boson_stream)
        conserved &= ring.total == total
    announce(8, "TASEP leader jumps pass chi-squared at 99.9%; Boson ring conserves mass over 1e4 steps",
             stat < crit and conserved, f"chi2={stat:.2f} < {crit:.2f} (dof {dof}), conserved={conserved}")


COMMANDS = [
    ["pmf", "--q", "9/10", "--mu", "3/4", "--nu", "1/4", "--m", "15", "--format", "csv"],
    ["pmf", "--m", "inf", "--backend", "float", "--format", "json"],
    ["verify", "--checks", "symmetry,recurrence,lemma-recursion,mc-duality", "--q-values", "1/4,1/2",
     "--max-n", "6", "--samples", "20000", "--seed", "7"],
    ["simulate", "tasep", "--particles", "10,7,3", "--steps", "2000", "--replicas", "3", "--seed", "11"],
    ["simulate", "boson", "--ring", "8", "--init", "2,0,1,0,0,0,0,0", "--steps", "1000", "--seed", "1",
     "--format", "json"],
]


def test_9_determinism(announce, tmp_path):
    differing = []
    for i, argv in enumerate(COMMANDS):
        outputs = []
        for rep in range(2):
            path = tmp_path / f"cmd{i}_{rep}.out"
            assert main(argv + ["--out", str(path)]) == 0
            outputs.append(path.read_bytes())
        if outputs[0] != outputs[1] or not outputs[0]:
            differing.append(argv[0])
    announce(9, "same seed reproduces byte-identical output files", not differing,
             f"{len(COMMANDS)} commands, differing: {differing or 'none'}")
