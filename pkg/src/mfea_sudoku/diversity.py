"""Entropy-based genotypic diversity of a population of digit grids.

At each locus the empirical digit distribution is scored by its entropy in
base 9, so a locus ranges from 0 (all members agree) to 1 (every digit
equally frequent). The population entropy is the mean over the 81 loci.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_ALLELES = 9


@dataclass(frozen=True)
class LocusDistribution:
    counts: np.ndarray  # counts[j] = occurrences of digit j + 1
    population_size: int

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.population_size


@dataclass(frozen=True)
class EntropyReport:
    locus_entropy: np.ndarray
    total_entropy: float
    generation: int = 0
    scope: str = "population"


def _stack(genotypes) -> np.ndarray:
    grids = np.asarray(genotypes)
    if grids.ndim != 3 or grids.shape[0] == 0:
        raise ValueError("entropy needs a non-empty (n, rows, cols) stack of genotypes")
    return grids


def digit_counts(genotypes) -> np.ndarray:
    """Counts of shape ``(9, rows, cols)``: index j holds digit j + 1."""
    grids = _stack(genotypes)
    return np.stack([(grids == d).sum(axis=0) for d in range(1, N_ALLELES + 1)])


def locus_distribution(genotypes, r: int, s: int) -> LocusDistribution:
    grids = _stack(genotypes)
    counts = np.array([(grids[:, r, s] == d).sum() for d in range(1, N_ALLELES + 1)])
    return LocusDistribution(counts, grids.shape[0])


def _entropy(counts: np.ndarray, n: int) -> np.ndarray:
    # zero counts contribute nothing: 0 * log 0 = 0
    p = counts / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, p * np.log(p), 0.0)
    h = -terms.sum(axis=0) / np.log(N_ALLELES)
    return np.clip(h, 0.0, 1.0)


def locus_entropy(genotypes, r: int, s: int) -> float:
    dist = locus_distribution(genotypes, r, s)
    return float(_entropy(dist.counts, dist.population_size))


def locus_entropies(genotypes) -> np.ndarray:
    grids = _stack(genotypes)
    return _entropy(digit_counts(grids), grids.shape[0])


def total_entropy(genotypes) -> float:
    return float(locus_entropies(genotypes).mean())


def population_entropy(genotypes, generation: int = 0, skill_factors=None, task=None) -> EntropyReport:
    """Entropy report for the whole population, or for one skill-factor subgroup."""
    grids = _stack(genotypes)
    scope = "population"
    if task is not None:
        grids = _stack(grids[np.asarray(skill_factors) == task])
        scope = f"task {task}"
    loci = locus_entropies(grids)
    return EntropyReport(loci, float(loci.mean()), generation, scope)
