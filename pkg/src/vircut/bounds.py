"""Experiment harness for the truncation-level operator-bound constants.

Three empirical constants are estimated by exhaustive sweeps over a
truncated representation:

* r_hat from the energy bound ||L_n v_k||^2 <= r^2 (k^2 + k n^2 + |n|^3)
  ||v_k||^2, as the worst ratio over all level/mode cells;

* q_hat from the heat-commutator bound ||R_{n,eps}||^2 <= q |n|^3,
  together with the chain inequality q_hat <= 3 r_hat^2;

* M_hat from the cubic coefficient decay |f_hat(n)| <= M/|n|^3.

Estimates are reported per (c, h, N) and never extrapolated: each report
carries its full per-cell table, and the witness cell is re-evaluated so
the quoted constant is reproducible bit for bit.

The q sweep never materializes commutator matrices.  On each level the
commutator with the heat semigroup is a scalar multiple of the generator
block (a consequence of L0 being scalar per level, verified honestly in
extended precision by smear.heat_identity_residual), so its norm is
|factor| times a precomputed block norm.  The analytic maximizer of each
factor is injected into the eps grid, which removes grid bias from the
reported maxima.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import verma
from .fields import (FEJER, FourierField, MollifierFamily, PiecewiseMobiusField,
                     fourier_coefficient)
from .smear import _opnorm, fm_sup


@dataclass(frozen=True)
class BoundReport:
    """One experiment's estimate with its full evidence table."""

    experiment: str
    parameters: dict
    constant: float
    witness: dict
    table: list[dict]
    tolerance: Optional[float]
    verdict: str
    derived: dict = dc_field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": self.parameters,
            "constant": self.constant,
            "witness": self.witness,
            "derived": self.derived,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "warnings": list(self.warnings),
            "table": self.table,
        }

    def write_csv(self, path) -> None:
        """One row per table cell, columns from the first row's keys."""
        with open(path, "w", newline="") as fh:
            if not self.table:
                fh.write("")
                return
            writer = csv.DictWriter(fh, fieldnames=list(self.table[0].keys()))
            writer.writeheader()
            writer.writerows(self.table)


def _rep_for(c, N: int, h, rep) -> verma.TruncatedRep:
    if rep is not None:
        return rep
    return verma.truncated_rep(Fraction(c), Fraction(h), N, mode="float")


def _block_norms(rep: verma.TruncatedRep) -> dict[tuple[int, int], float]:
    """Operator norm of each orthonormal-basis block of L_n at level src."""
    out = {}
    for n in range(-rep.N, rep.N + 1):
        for src in range(rep.N + 1):
            if not 0 <= src - n <= rep.N:
                continue
            blk = rep.orthonormal_block(n, src)
            if blk is not None:
                out[(n, src)] = _opnorm(blk)
    return out


def estimate_r(c, N: int, h=0, rep: Optional[verma.TruncatedRep] = None
               ) -> BoundReport:
    """Sweep every (level, mode) cell for the energy-bound ratio.

    The reported constant is r_hat^2 = max ||L_n|_k||^2/(k^2 + k n^2 +
    |n|^3); cells with an empty or out-of-range window are flagged, and
    the (0, 0) cell has a vanishing denominator and is skipped.
    """
    rep = _rep_for(c, N, h, rep)
    norms = _block_norms(rep)
    table = []
    skipped = 0
    best = None
    for src in range(rep.N + 1):
        for n in range(-rep.N, rep.N + 1):
            denom = float(src * src + src * n * n + abs(n) ** 3)
            if (n, src) not in norms:
                skipped += 1
                continue
            if denom == 0.0:
                skipped += 1
                continue
            ratio = norms[(n, src)] ** 2 / denom
            row = {"k": src, "n": n, "norm_sq": norms[(n, src)] ** 2,
                   "denominator": denom, "ratio": ratio}
            table.append(row)
            if best is None or ratio > best["ratio"]:
                best = row
    # witness reproducibility: recompute the winning cell from scratch
    re_norm = _opnorm(rep.orthonormal_block(best["n"], best["k"]))
    reproduced = re_norm ** 2 / best["denominator"] == best["ratio"]
    return BoundReport(
        experiment="energy-bound-r",
        parameters={"c": str(rep.c), "h": str(rep.h), "N": rep.N,
                    "mode": rep.mode},
        constant=best["ratio"],
        witness={"k": best["k"], "n": best["n"], "ratio": best["ratio"],
                 "reproduced": reproduced},
        table=table,
        tolerance=None,
        verdict="pass" if reproduced else "fail",
        derived={"r_hat": math.sqrt(best["ratio"]), "cells": len(table),
                 "skipped": skipped},
    )


def default_eps_grid(lo: float = 1e-4, hi: float = 20.0, count: int = 200
                     ) -> np.ndarray:
    if count < 1 or lo <= 0 or hi <= lo:
        raise ValueError("eps grid needs 0 < lo < hi and count >= 1")
    return np.logspace(math.log10(lo), math.log10(hi), count)


def _q_mode_sweep(rep: verma.TruncatedRep, norms: dict, n: int,
                  grid: np.ndarray, h_f: float) -> Optional[dict]:
    """Vectorized ||R_{n,eps}||^2/|n|^3 over the grid plus injected maximizers.

    Kept as one function so the witness check can rerun it verbatim: the
    same input arrays through the same operations reproduce bit-identical
    floats, which a scalar-math recomputation would not.
    """
    sources = [src for src in range(rep.N + 1) if (n, src) in norms
               and norms[(n, src)] > 0.0]
    if not sources:
        return None
    m = abs(n)
    injected = []
    unbounded_max = False
    for src in sources:
        k_low = h_f + min(src, src - n)
        if k_low == 0.0:
            unbounded_max = True  # factor increases toward 1, sup at infinity
        else:
            injected.append(math.log((k_low + m) / k_low) / m)
    eps_all = np.concatenate([grid, np.asarray(injected)]) if injected else grid
    order = np.argsort(eps_all, kind="stable")
    eps_all = eps_all[order]
    grid_mask = np.concatenate([np.ones(grid.size, bool),
                                np.zeros(len(injected), bool)])[order]

    src_arr = np.asarray(sources, dtype=np.float64)
    dst_arr = src_arr - n
    nrm_arr = np.asarray([norms[(n, s)] for s in sources])
    factors = np.exp(-np.outer(eps_all, h_f + src_arr)) \
        - np.exp(-np.outer(eps_all, h_f + dst_arr))
    sup_sq = np.asarray([fm_sup(h_f + min(s, s - n), m)[1] for s in sources])
    fm_violations = int(np.sum(factors ** 2 > sup_sq[None, :] * (1 + 1e-12)))
    weighted = np.abs(factors) * nrm_arr[None, :]
    values = weighted.max(axis=1) ** 2 / m ** 3
    level_idx = weighted.argmax(axis=1)
    return {"eps_all": eps_all, "grid_mask": grid_mask, "values": values,
            "levels": [sources[int(i)] for i in level_idx],
            "fm_violations": fm_violations, "unbounded_max": unbounded_max}


def estimate_q(c, N: int, eps_grid: Optional[Sequence[float]] = None, h=0,
               rep: Optional[verma.TruncatedRep] = None,
               r_report: Optional[BoundReport] = None) -> BoundReport:
    """Sweep ||R_{n,eps}||^2 / |n|^3 over modes and the eps grid.

    Each (n, eps) value is max over source levels of |factor|^2 times the
    squared block norm, with factor = e^{-eps(h+src)} - e^{-eps(h+dst)}.
    The closed-form maximizer of every per-level factor is injected into
    the grid.  Verifies the chain q_hat <= 3 r_hat^2 against a same-run
    r estimate, and checks every per-level factor against its closed-form
    supremum from fm_sup.
    """
    rep = _rep_for(c, N, h, rep)
    if eps_grid is None:
        grid = default_eps_grid()
    else:
        grid = np.asarray(list(eps_grid), dtype=np.float64)
        if grid.size == 0 or np.any(grid <= 0):
            raise ValueError("eps grid must be nonempty and positive")
    if r_report is None:
        r_report = estimate_r(c, N, h=h, rep=rep)
    norms = _block_norms(rep)
    h_f = float(rep.h)

    warnings: list[str] = []
    table = []
    best = None
    fm_violations = 0
    for n in range(-rep.N, rep.N + 1):
        if n == 0:
            continue  # R_{0,eps} vanishes identically
        sweep = _q_mode_sweep(rep, norms, n, grid, h_f)
        if sweep is None:
            continue
        fm_violations += sweep["fm_violations"]
        values = sweep["values"]
        i_best = int(values.argmax())
        grid_values = values[sweep["grid_mask"]]
        i_grid = int(grid_values.argmax())
        if i_grid in (0, grid_values.size - 1) and not (
                i_grid == grid_values.size - 1 and sweep["unbounded_max"]):
            warnings.append(f"mode {n}: eps maximizer on the grid boundary")
        for i, eps in enumerate(sweep["eps_all"]):
            table.append({"n": n, "eps": float(eps), "value": float(values[i]),
                          "level": sweep["levels"][i],
                          "injected": not bool(sweep["grid_mask"][i])})
        if best is None or values[i_best] > best["value"]:
            best = {"n": n, "eps": float(sweep["eps_all"][i_best]),
                    "value": float(values[i_best]),
                    "level": sweep["levels"][i_best], "index": i_best}

    # witness reproducibility: rerun the winning mode's sweep from scratch
    redo = _q_mode_sweep(rep, _block_norms(rep), best["n"], grid, h_f)
    reproduced = float(redo["values"][best["index"]]) == best["value"]
    best.pop("index")

    r_sq = r_report.constant
    chain_ok = best["value"] <= 3.0 * r_sq
    if fm_violations:
        warnings.append(f"{fm_violations} factor cells exceeded the fm_sup bound")
    return BoundReport(
        experiment="heat-commutator-q",
        parameters={"c": str(rep.c), "h": str(rep.h), "N": rep.N,
                    "mode": rep.mode, "eps_grid_size": int(grid.size)},
        constant=best["value"],
        witness={**best, "reproduced": reproduced},
        table=table,
        tolerance=None,
        verdict="pass" if (chain_ok and reproduced and not fm_violations) else "fail",
        derived={"q_hat": best["value"], "r_hat_sq": r_sq,
                 "chain_bound": 3.0 * r_sq, "chain_ok": chain_ok},
        warnings=tuple(warnings),
    )


def decay_report(field, n_max: int) -> BoundReport:
    """M_hat = max |f_hat(n)| |n|^3 over 2 <= |n| <= n_max.

    The stabilization diagnostic compares the maximum over the last decade
    (n_max/10, n_max] with the global maximum; a ratio well below 1 means
    the estimate has stopped moving.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if isinstance(field, PiecewiseMobiusField):
        # |f_hat(-n)| = |f_hat(n)|, so the positive side carries the maximum
        ns = np.arange(2, n_max + 1)
        mags = field.coefficient_abs_array(ns)
        scaled = mags * ns.astype(np.float64) ** 3
        table = [{"n": int(n), "abs_coefficient": float(a), "scaled": float(s)}
                 for n, a, s in zip(ns, mags, scaled) if a > 0.0]
    elif isinstance(field, FourierField):
        rows = {}
        for n in field.support:
            if 2 <= abs(n) <= n_max:
                a = abs(complex(fourier_coefficient(field, n)))
                rows[abs(n)] = max(rows.get(abs(n), 0.0), a)
        table = [{"n": n, "abs_coefficient": a, "scaled": a * n ** 3}
                 for n, a in sorted(rows.items())]
    else:
        raise TypeError(f"unsupported field type {type(field).__name__}")
    if not table:
        return BoundReport("coefficient-decay-M", {"n_max": n_max}, 0.0,
                           {}, [], None, "pass",
                           derived={"stabilization_ratio": None})
    best = max(table, key=lambda r: r["scaled"])
    decade = [r["scaled"] for r in table if r["n"] > n_max // 10]
    ratio = max(decade) / best["scaled"] if decade and best["scaled"] > 0 else None
    return BoundReport(
        experiment="coefficient-decay-M",
        parameters={"n_max": n_max},
        constant=best["scaled"],
        witness={"n": best["n"], "scaled": best["scaled"]},
        table=table,
        tolerance=None,
        verdict="pass",
        derived={"m_hat": best["scaled"], "stabilization_ratio": ratio},
    )


def _weight_series_chunks(k_points: Sequence[int], chunk: int = 1 << 21):
    """Cumulative n*W and W sums of the piecewise field's weight series.

    W(n) = 2 |f_hat(n)| (1 + n^{3/2}) summed over the support n = 2 mod 4
    up to max(k_points); yields (k, cum_nW(k), cum_W(k)) per requested
    point plus the grand totals.
    """
    k_points = sorted(set(int(k) for k in k_points))
    n_max = k_points[-1]
    cum_v = 0.0
    cum_w = 0.0
    out = {}
    targets = iter(k_points)
    target = next(targets)
    lo = 2
    while lo <= n_max:
        hi = min(lo + chunk - 1, n_max)
        while target is not None and target < lo:
            out[target] = (cum_v, cum_w)
            target = next(targets, None)
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        sel = ns[ns % 4 == 2].astype(np.float64)
        if sel.size:
            w = 2.0 * (8.0 / (math.pi * sel * (sel * sel - 1.0))) \
                * (1.0 + sel ** 1.5)
            v = sel * w
            cw = np.cumsum(w)
            cv = np.cumsum(v)
            while target is not None and lo <= target <= hi:
                idx = int(np.searchsorted(sel, target + 0.5)) - 1
                out[target] = (cum_v + (cv[idx] if idx >= 0 else 0.0),
                               cum_w + (cw[idx] if idx >= 0 else 0.0))
                target = next(targets, None)
            cum_v += float(cv[-1])
            cum_w += float(cw[-1])
        else:
            while target is not None and lo <= target <= hi:
                out[target] = (cum_v, cum_w)
                target = next(targets, None)
        lo = hi + 1
    for k in k_points:
        if k not in out:
            out[k] = (cum_v, cum_w)
    return out, cum_v, cum_w


def _piecewise_tail_bound(n0: int) -> float:
    """Rigorous bound on Sum_{n > n0, n = 2 mod 4} W(n).

    W(n) = (16/pi)(1 + n^{3/2})/(n(n^2-1)) <= (16/pi)(n^{-3} + n^{-3/2})
    / (1 - n0^{-2}); the sum over the spacing-4 progression starting at
    n1 > n0 is bounded by the first term plus the integral, for each
    power separately.
    """
    n1 = n0 + 1
    while n1 % 4 != 2:
        n1 += 1
    slack = 1.0 / (1.0 - 1.0 / (n0 * n0))
    s3 = n1 ** -3.0 + n1 ** -2.0 / 8.0
    s32 = n1 ** -1.5 + n1 ** -0.5 / 2.0
    return (16.0 / math.pi) * slack * (s3 + s32)


def mollifier_report(field, family: MollifierFamily = FEJER,
                     k_max: int = 1 << 26, tol: float = 1e-3,
                     ladder: Optional[Sequence[int]] = None) -> BoundReport:
    """Table of ||phi_k * f - f||_{3/2} on a ladder of smoothing orders.

    For finitely supported fields the error is summed directly.  For the
    piecewise field with the Fejer family the error splits as
    cum(n W)(k)/(k+1) + tail(W)(k); both parts are accumulated in chunks
    and the un-enumerated remainder is covered by a rigorous upper bound,
    so every reported entry is an upper bound on the true error and the
    sequence stays monotone nonincreasing.
    """
    if ladder is None:
        ladder = [1 << j for j in range(0, max(1, k_max.bit_length()))
                  if (1 << j) <= k_max]
        if ladder[-1] != k_max:
            ladder.append(k_max)
    ladder = sorted(set(int(k) for k in ladder))

    if isinstance(field, FourierField):
        table = []
        for k in ladder:
            err = sum((1.0 - family.multiplier(k, n)) * abs(complex(a))
                      * (1.0 + abs(n) ** 1.5)
                      for n, a in field.coefficients.items())
            table.append({"k": k, "error": float(err), "tail_bound": 0.0})
    elif isinstance(field, PiecewiseMobiusField):
        if family.kind != "fejer":
            raise TypeError("the piecewise field is swept with the Fejer family")
        sums, _, w_all = _weight_series_chunks(ladder)
        tail_const = _piecewise_tail_bound(ladder[-1])
        table = []
        for k in ladder:
            cum_v, cum_w = sums[k]
            err = cum_v / (k + 1.0) + (w_all - cum_w) + tail_const
            table.append({"k": k, "error": float(err),
                          "tail_bound": float(tail_const)})
    else:
        raise TypeError(f"unsupported field type {type(field).__name__}")

    final = table[-1]["error"]
    monotone = all(table[i + 1]["error"] <= table[i]["error"] + 1e-15
                   for i in range(len(table) - 1))
    warnings = () if monotone else ("error sequence is not monotone",)
    return BoundReport(
        experiment="mollifier-convergence",
        parameters={"family": family.kind, "k_max": ladder[-1],
                    "ladder_points": len(ladder)},
        constant=final,
        witness={"k": ladder[-1], "error": final},
        table=table,
        tolerance=tol,
        verdict="pass" if (final < tol and monotone) else "fail",
        derived={"monotone": monotone},
        warnings=warnings,
    )
