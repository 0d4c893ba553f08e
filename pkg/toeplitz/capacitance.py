"""
Capacitance Matrices and the Skin-Effect Pipeline

This module ingests dense gauge-capacitance-style matrices (or synthesizes a
stand-in with algebraic off-diagonal decay and gamma-controlled asymmetry),
regularises them into Toeplitz form and runs the band-structure, limiting-set
and defect analysis for a list of bandwidths.

Boundary-integral assembly of real capacitance matrices is not part of this
package; real data enters through load().
"""

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from loguru import logger
from scipy.special import zeta

from config import settings
from toeplitz.defects import DEFECT, decay_profile, defect_eigenpairs
from toeplitz.eigenmodes import band_structure_sweep
from toeplitz.eigensolve import eigenvalues
from toeplitz.exceptions import DomainError, MatrixParseError, ToeplitzError, WindingMismatchError
from toeplitz.grid import parallel_map
from toeplitz.matrices import DenseMatrix, assemble, central_block, fit_decay_rates, toeplitzify
from toeplitz.roots import sorted_moduli
from toeplitz.spectra import ON_CURVE, OUTSIDE, classify_region, normalized_indicator
from toeplitz.symbol import curve_values

FILE = "file"
SYNTHETIC = "synthetic"
EDGE_LAYER = 5


@dataclass(frozen=True)
class CapacitanceSource:
    """
    Where the dense matrix comes from.

    Args:
        origin (str): "file" or "synthetic"
        path (str, optional): Matrix file for origin "file"
        gamma (float): Gauge strength of the synthetic generator
        p_syn (float): Algebraic decay rate of the synthetic generator
        n (int): Synthetic matrix size
        c0 (float): Synthetic amplitude scale
        edge (float): Synthetic edge perturbation strength
        noise (float): Synthetic noise level
        seed (int): Seed for the synthetic noise
        delta_note (float, optional): Contrast parameter, carried as metadata only
    """

    origin: str = SYNTHETIC
    path: str = None
    gamma: float = 1.0
    p_syn: float = 1.4
    n: int = settings.DEFAULT_OUTER_SIZE
    c0: float = 1.0
    edge: float = 0.0
    noise: float = 0.0
    seed: int = 0
    delta_note: float = None

    def __post_init__(self):
        if self.origin not in (FILE, SYNTHETIC):
            raise DomainError(f"Unknown matrix origin: {self.origin}")
        if self.origin == FILE and not self.path:
            raise DomainError("A file source needs a path")
        if self.origin == SYNTHETIC:
            if not np.isfinite(self.gamma):
                raise DomainError("gamma must be finite")
            if self.p_syn <= 1:
                raise DomainError(f"Synthetic decay rate must exceed 1, got {self.p_syn}")

    def materialize(self):
        """Load or synthesize the dense matrix."""
        if self.origin == FILE:
            return load(self.path)
        rng = np.random.default_rng(self.seed)
        return synth_gauge(self.n, self.gamma, self.p_syn, self.c0, self.edge, self.noise, rng)


def _infer_format(path, format):
    if format:
        return format.lower()
    suffix = Path(path).suffix.lower().lstrip(".")
    return "json" if suffix == "json" else "csv"


def _parse_grid(rows, origin):
    """Turn nested rows of text or numbers into a square array, reporting locations."""
    parsed = []
    width = None
    for r, row in enumerate(rows, start=1):
        values = []
        for c, cell in enumerate(row, start=1):
            try:
                value = float(cell)
            except (TypeError, ValueError):
                raise MatrixParseError(f"Non-numeric entry {cell!r} in {origin}", r, c)
            if not np.isfinite(value):
                raise MatrixParseError(f"Non-finite entry in {origin}", r, c)
            values.append(value)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise MatrixParseError(f"Ragged row with {len(values)} entries, expected {width}, in {origin}", r)
        parsed.append(values)
    if not parsed:
        raise MatrixParseError(f"Empty matrix in {origin}")
    if len(parsed) != width:
        raise MatrixParseError(f"Matrix in {origin} is non-square ({len(parsed)}x{width})")
    return np.array(parsed)


def load(path, format=None):
    """
    Read a square matrix from CSV (plain numeric grid) or JSON.

    JSON may be {"n": n, "entries": [...]} with a flat row-major or nested
    list, or a bare nested list.

    Returns:
        DenseMatrix: Matrix with provenance "file:<path>"
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    try:
        with open(path, newline="") as f:
            if fmt == "csv":
                lines = (line for line in f if line.strip() and not line.lstrip().startswith("#"))
                rows = [[cell.strip() for cell in row] for row in csv.reader(lines)]
                entries = _parse_grid(rows, path.name)
            elif fmt == "json":
                entries = _entries_from_json(json.load(f), path.name)
            else:
                raise MatrixParseError(f"Unsupported matrix format {fmt!r}")
    except OSError as e:
        raise MatrixParseError(f"Cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise MatrixParseError(f"Invalid JSON in {path.name}: {e.msg}", e.lineno, e.colno)
    logger.info(f"Loaded {entries.shape[0]}x{entries.shape[1]} matrix from {path}")
    return DenseMatrix(entries, (f"file:{path}",))


def _entries_from_json(payload, origin):
    entries = payload.get("entries") if isinstance(payload, dict) else payload
    if not isinstance(entries, list) or not entries:
        raise MatrixParseError(f"No entries list in {origin}")
    if isinstance(entries[0], list):
        return _parse_grid(entries, origin)
    n = payload.get("n") if isinstance(payload, dict) else None
    if n is None:
        n = int(round(np.sqrt(len(entries))))
    n = int(n)
    if n * n != len(entries):
        raise MatrixParseError(f"Matrix in {origin} is non-square ({len(entries)} entries for n={n})")
    return _parse_grid([entries[i * n:(i + 1) * n] for i in range(n)], origin)


def save(M, path, format=None):
    """Write a DenseMatrix as CSV or JSON; load(save(M)) reproduces the entries."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = _infer_format(path, format)
    with open(path, "w", newline="") as f:
        if fmt == "csv":
            writer = csv.writer(f)
            for row in M.entries:
                writer.writerow(["%.17g" % v for v in row])
        elif fmt == "json":
            json.dump(M.to_json(), f)
        else:
            raise DomainError(f"Unsupported matrix format {fmt!r}")
    logger.info(f"Saved {M.n}x{M.n} matrix to {path}")
    return path


def synth_gauge(n, gamma, p_syn, c0=1.0, edge=0.0, noise=0.0, rng=None):
    """
    Synthetic gauge-capacitance stand-in.

    Off-diagonals are -c |d|^{-p_syn}. Entries above the diagonal carry the
    amplitude c0 e^{gamma/2} and entries below carry c0 e^{-gamma/2}, so
    gamma > 0 pushes bulk modes towards the first index. The diagonal
    (c_above + c_below) zeta(p_syn) + c0 keeps row sums of order c0.

    Args:
        n (int): Size, at least 4
        gamma (float): Gauge strength
        p_syn (float): Decay rate, greater than 1
        c0 (float): Amplitude scale
        edge (float): Strength of a boundary-layer perturbation of the first
            and last rows and columns
        noise (float): Standard deviation of additive noise (relative to c0)
        rng (np.random.Generator, optional): Noise source

    Returns:
        DenseMatrix: n x n matrix, exactly Toeplitz when edge = noise = 0
    """
    n = int(n)
    if n < 4:
        raise DomainError(f"synth_gauge needs n >= 4, got {n}")
    if p_syn <= 1:
        raise DomainError(f"synth_gauge needs p_syn > 1, got {p_syn}")
    above = c0 * np.exp(gamma / 2.0)
    below = c0 * np.exp(-gamma / 2.0)
    d = np.arange(1, n, dtype=float)
    diagonals = np.empty(2 * n - 1)
    diagonals[n:] = -below * d ** (-p_syn)
    diagonals[:n - 1] = (-above * d ** (-p_syn))[::-1]
    diagonals[n - 1] = (above + below) * float(zeta(p_syn)) + c0
    entries = assemble_diagonals(diagonals, n)

    if edge:
        depth = np.minimum(np.arange(n), np.arange(n)[::-1])
        weight = np.exp(-depth / EDGE_LAYER)
        entries = entries * (1.0 + edge * np.maximum.outer(weight, weight))
    if noise:
        rng = rng if rng is not None else np.random.default_rng(0)
        entries = entries + noise * c0 * rng.standard_normal((n, n))

    note = f"synthetic:n={n},gamma={gamma},p={p_syn},c0={c0},edge={edge},noise={noise}"
    logger.debug(f"Synthesized gauge matrix ({note})")
    return DenseMatrix(entries, (note,))


def assemble_diagonals(diagonals, n):
    """Dense n x n Toeplitz matrix from diagonals indexed by offset d = i - j (d + n - 1)."""
    i, j = np.indices((n, n))
    return np.asarray(diagonals)[i - j + n - 1]


def regularize(M, n_block=None):
    """
    Central block followed by diagonal averaging.

    Args:
        M (DenseMatrix): Ingested or synthetic matrix
        n_block (int, optional): Block size (default TOEPLITZ_SPECTRA_BLOCK_SIZE,
            capped at the matrix size)

    Returns:
        FiniteToeplitz: Toeplitz regularisation with the provenance chain
    """
    n_block = min(settings.DEFAULT_BLOCK_SIZE, M.n) if n_block is None else int(n_block)
    return toeplitzify(central_block(M, n_block))


def toeplitz_distance(M, n_block):
    """Relative Frobenius distance between the central block and its Toeplitz regularisation."""
    block = central_block(M, n_block)
    regular = toeplitzify(block).dense()
    return float(np.linalg.norm(block.entries - regular) / np.linalg.norm(block.entries))


@dataclass(frozen=True)
class DistanceSeries:
    sizes: tuple
    distances: tuple


def toeplitz_distance_series(source, sizes, n_block=None, threads=None):
    """
    Toeplitz distance of the central block as the synthetic outer matrix grows.

    Args:
        source (CapacitanceSource): Synthetic source; its n is replaced by each size
        sizes (list[int]): Strictly ascending outer sizes M, each at least n_block
        n_block (int, optional): Block size (default TOEPLITZ_SPECTRA_BLOCK_SIZE)
        threads (int, optional): Worker cap

    Returns:
        DistanceSeries: toeplitz_distance for every M
    """
    if source.origin != SYNTHETIC:
        raise DomainError("A distance series needs a synthetic source")
    n_block = settings.DEFAULT_BLOCK_SIZE if n_block is None else int(n_block)
    sizes = [int(M) for M in sizes]
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DomainError(f"Outer sizes must be non-empty and strictly ascending, got {sizes}")
    if sizes[0] < n_block:
        raise DomainError(f"Outer size {sizes[0]} is smaller than the block size {n_block}")
    distances = parallel_map(
        lambda M: toeplitz_distance(replace(source, n=M).materialize(), n_block), sizes, threads)
    logger.info(f"Toeplitz distance for M={sizes[0]}..{sizes[-1]}: {distances[0]:.3e} -> {distances[-1]:.3e}")
    return DistanceSeries(tuple(sizes), tuple(distances))


def eigenfrequencies(eigvals):
    """Principal square roots omega_n = sqrt(lambda_n), in input order."""
    return np.sqrt(np.asarray(eigvals, dtype=complex))


@dataclass(frozen=True, eq=False)
class BandwidthReport:
    """Analysis of one bandwidth truncation of the regularised matrix."""

    bandwidth: int
    lambdas: np.ndarray = field(repr=False)
    sweep: np.ndarray = field(repr=False)
    indicator: np.ndarray = field(repr=False)
    windings: tuple = field(repr=False)
    limit_lambdas: np.ndarray = field(repr=False)
    limit_betas: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigen_betas: np.ndarray = field(repr=False)
    frequencies: np.ndarray = field(repr=False)
    profile: object = None
    defect_lambda: complex = None

    @property
    def mean_beta(self):
        finite = self.eigen_betas[np.isfinite(self.eigen_betas)]
        return float(finite.mean()) if finite.size else float("nan")

    def summary(self):
        return {
            "bandwidth": self.bandwidth,
            "mean_beta": self.mean_beta,
            "limit_points": int(self.limit_lambdas.size),
            "limit_beta_mean": float(self.limit_betas.mean()) if self.limit_betas.size else None,
            "defect_lambda": self.defect_lambda,
            "profile": self.profile.summary() if self.profile is not None else None,
        }


@dataclass(frozen=True, eq=False)
class SkinReport:
    """Complete skin-effect dataset for a source and a list of bandwidths."""

    source: CapacitanceSource
    toeplitz: object = field(repr=False)
    fit: object = None
    bandwidths: tuple = ()
    partial: bool = False
    messages: tuple = ()

    def summary(self):
        return {
            "source": {k: v for k, v in vars(self.source).items()},
            "n_block": self.toeplitz.n,
            "provenance": list(self.toeplitz.provenance),
            "fit": {
                "p": self.fit.p, "q": self.fit.q, "c_plus": self.fit.c_plus,
                "c_minus": self.fit.c_minus, "r_squared": list(self.fit.r_squared),
            },
            "bandwidths": [b.summary() for b in self.bandwidths],
            "partial": self.partial,
            "messages": list(self.messages),
        }


def _scan_winding(s, lam):
    """Winding at a scan point; None on the curve or when the two counts disagree."""
    try:
        label = classify_region(s, lam)
    except WindingMismatchError as e:
        logger.warning(str(e))
        return None
    return None if label.kind == ON_CURVE else label.winding


def _analyse_bandwidth(T, bandwidth, alpha, defect, scan, threads):
    s = T.to_symbol(bandwidth)
    _, curve = curve_values(s, 4096)
    lambdas = np.linspace(curve.real.min(), curve.real.max(), scan + 2)[1:-1]
    sweep = band_structure_sweep(s, lambdas, threads=1)
    indicator = normalized_indicator(s, lambdas, threads=1)
    windings = tuple(_scan_winding(s, lam) for lam in lambdas)

    moduli = sorted_moduli(s, lambdas, threads=1)
    on_set = indicator < settings.LIMIT_SET_THRESHOLD
    with np.errstate(divide="ignore"):
        limit_betas = -np.log(moduli[on_set, s.m])

    truncation = assemble(s, T.n)
    eigs = eigenvalues(truncation)
    with np.errstate(divide="ignore"):
        eigen_betas = -np.log(sorted_moduli(s, eigs, threads=1)[:, s.m])

    profile = None
    defect_lambda = None
    if defect is not None:
        pairs = [p for p in defect_eigenpairs(truncation, defect) if p.label == DEFECT]
        # Prefer a defect eigenvalue outside the winding region, where the Jaffard bound applies
        outside = [p for p in pairs if classify_region(s, p.value).kind == OUTSIDE]
        chosen = outside or pairs
        if chosen:
            defect_lambda = max(chosen, key=lambda p: float(np.min(np.abs(eigs - p.value)))).value
            profile = decay_profile(truncation, defect_lambda, defect.site, alpha, bandwidth)
        else:
            logger.warning(f"No defect eigenvalue detached from the bulk at bandwidth {bandwidth}")

    logger.info(f"Bandwidth {bandwidth}: mean beta {np.nanmean(eigen_betas[np.isfinite(eigen_betas)]):.4g}, "
                f"{int(on_set.sum())} limit-set points on the real scan")
    return BandwidthReport(
        bandwidth, lambdas, sweep, indicator, windings, lambdas[on_set], limit_betas,
        eigs, eigen_betas, eigenfrequencies(eigs), profile, defect_lambda,
    )


def skin_report(source, bandwidth_list, defect=None, n_block=None, scan=200, threads=None):
    """
    End-to-end skin-effect analysis.

    Load or synthesize, regularise, fit the decay law, then for each
    bandwidth: truncate, sweep the real band structure, scan the limiting-set
    indicator, classify windings, evaluate beta at the eigenvalues of the
    finite truncation and, with a defect, compute its Green's-mode profile.

    Args:
        source (CapacitanceSource): Matrix source
        bandwidth_list (list[int]): Bandwidths to analyse
        defect (DefectSpec, optional): Defect applied to each truncation
        n_block (int, optional): Central block size
        scan (int): Real lambda samples per bandwidth

    Returns:
        SkinReport: Per-bandwidth datasets ordered as bandwidth_list
    """
    matrix = source.materialize()
    T = regularize(matrix, n_block)
    fit = fit_decay_rates(T)
    alpha = min(fit.p, fit.q)
    if defect is not None:
        defect.validate(T.n)

    messages = []
    bandwidths = [int(b) for b in bandwidth_list]
    for b in bandwidths:
        if not 1 <= b < T.n:
            raise DomainError(f"Bandwidth {b} outside 1..{T.n - 1}")

    def analyse(b):
        try:
            return _analyse_bandwidth(T, b, alpha, defect, scan, threads)
        except ToeplitzError as e:
            logger.error(f"Bandwidth {b} analysis failed: {e}")
            messages.append(f"bandwidth {b}: {e}")
            return None

    results = parallel_map(analyse, bandwidths, threads)
    reports = tuple(r for r in results if r is not None)
    partial = len(reports) != len(bandwidths)
    if partial:
        logger.warning(f"Skin report is partial: {len(bandwidths) - len(reports)} bandwidths failed")
    return SkinReport(source, T, fit, reports, partial, tuple(messages))
