"""On-disk chain archive.

Layout (format version 1), one directory per chain::

    metadata.json         configuration, hyperparameters, dimensions, names,
                          acceptance ledger, block index (sorted keys)
    <block>.npy           one array per parameter block, leading axis = stored scan
    acceptance_trace.npy  cumulative [accepted, proposed] per MH move at each stored scan

Blocks always present: beta0, alpha0, b_mat, a_mat, gamma, delta, sigma2_beta,
sigma2_alpha, sigma2_beta0, sigma2_alpha0. Optional: r_corr, sigma_v (when
covariances are stored), v_rand, w_lat (when latents are stored).
Wall-clock time is kept in memory only so archives stay byte-reproducible.
"""
from __future__ import annotations

import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidArgument
from .model import ModelState, validate_state

FORMAT_NAME = "mzip-chain"
FORMAT_VERSION = 1

CORE_BLOCKS = ("beta0", "alpha0", "b_mat", "a_mat", "gamma", "delta", "sigma2_beta", "sigma2_alpha",
               "sigma2_beta0", "sigma2_alpha0")
OPTIONAL_BLOCKS = ("r_corr", "sigma_v", "v_rand", "w_lat")


@dataclass
class ChainArchive:
    config: dict
    hyperparameters: dict
    dims: dict
    names: dict
    blocks: dict
    acceptance: dict = field(default_factory=dict)
    acceptance_trace: Optional[np.ndarray] = None
    wall_seconds: Optional[float] = None

    @property
    def n_stored(self) -> int:
        return int(self.blocks["beta0"].shape[0])

    def __getattr__(self, name):
        blocks = self.__dict__.get("blocks")
        if blocks is not None and name in blocks:
            return blocks[name]
        raise AttributeError(name)

    def state_at(self, s: int) -> ModelState:
        """Reconstruct stored scan ``s``; requires covariances and latents to be stored."""
        missing = [b for b in OPTIONAL_BLOCKS if b not in self.blocks]
        if missing:
            raise InvalidArgument(f"archive lacks blocks {missing} needed for a full state")
        b = self.blocks
        return ModelState(
            beta0=b["beta0"][s].copy(), alpha0=b["alpha0"][s].copy(), b_mat=b["b_mat"][s].copy(),
            a_mat=b["a_mat"][s].copy(), gamma=b["gamma"][s].astype(np.int64), delta=b["delta"][s].astype(np.int64),
            v_rand=b["v_rand"][s].copy(), sigma_v=b["sigma_v"][s].copy(), r_corr=b["r_corr"][s].copy(),
            w_lat=b["w_lat"][s].copy(), sigma2_beta=b["sigma2_beta"][s].copy(),
            sigma2_alpha=b["sigma2_alpha"][s].copy(), sigma2_beta0=float(b["sigma2_beta0"][s]),
            sigma2_alpha0=float(b["sigma2_alpha0"][s]),
        )

    def validate(self) -> None:
        """Check the stored-state invariants block by block."""
        from .errors import InvalidState

        b = self.blocks
        if np.any((np.swapaxes(b["b_mat"], 1, 2) == 0) != (b["gamma"] == 0)):
            raise InvalidState("stored b_mat / gamma are inconsistent")
        if np.any((np.swapaxes(b["a_mat"], 1, 2) == 0) != (b["delta"] == 0)):
            raise InvalidState("stored a_mat / delta are inconsistent")
        if "r_corr" in b:
            r = b["r_corr"]
            if not np.allclose(np.diagonal(r, axis1=1, axis2=2), 1.0):
                raise InvalidState("stored r_corr lacks a unit diagonal")
            if np.linalg.eigvalsh(r).min() <= 0:
                raise InvalidState("stored r_corr is not positive-definite")
        if "sigma_v" in b and np.linalg.eigvalsh(b["sigma_v"]).min() <= 0:
            raise InvalidState("stored sigma_v is not positive-definite")
        if all(k in b for k in OPTIONAL_BLOCKS):
            for s in range(self.n_stored):
                validate_state(self.state_at(s))

    # ------------------------------------------------------------------ io

    def save(self, path) -> Path:
        """Write atomically: build in a sibling temp dir, then rename into place."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=".tmp-", dir=path.parent))
        try:
            index = {}
            for name in sorted(self.blocks):
                arr = np.ascontiguousarray(self.blocks[name])
                np.save(tmp / f"{name}.npy", arr, allow_pickle=False)
                index[name] = {"shape": list(arr.shape), "dtype": arr.dtype.str}
            if self.acceptance_trace is not None:
                np.save(tmp / "acceptance_trace.npy", np.ascontiguousarray(self.acceptance_trace), allow_pickle=False)
            meta = {
                "format": FORMAT_NAME, "version": FORMAT_VERSION, "config": self.config,
                "hyperparameters": self.hyperparameters, "dims": self.dims, "names": self.names,
                "acceptance": self.acceptance, "blocks": index,
            }
            (tmp / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
            if path.exists():
                shutil.rmtree(path)
            os.replace(tmp, path)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
        return path

    @classmethod
    def load(cls, path) -> "ChainArchive":
        path = Path(path)
        meta_file = path / "metadata.json"
        if not meta_file.exists():
            raise InvalidArgument(f"{path} is not a chain archive (no metadata.json)")
        meta = json.loads(meta_file.read_text())
        if meta.get("format") != FORMAT_NAME or meta.get("version") != FORMAT_VERSION:
            raise InvalidArgument(f"unsupported archive format {meta.get('format')!r} v{meta.get('version')}")
        blocks = {name: np.load(path / f"{name}.npy", allow_pickle=False) for name in meta["blocks"]}
        trace_file = path / "acceptance_trace.npy"
        trace = np.load(trace_file, allow_pickle=False) if trace_file.exists() else None
        return cls(config=meta["config"], hyperparameters=meta["hyperparameters"], dims=meta["dims"],
                   names=meta["names"], blocks=blocks, acceptance=meta["acceptance"], acceptance_trace=trace)
