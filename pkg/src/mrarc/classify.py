"""Residual-based classification on top of the representation solvers.

A query is coded over the whole dictionary, the code is restricted to one
class at a time, and the class whose restricted reconstruction leaves the
smallest residual wins.  Methods with the MR prefix measure that residual
with the modal-regression loss at the bandwidth the solver ended on; the
squared-loss baselines use the l2 norm.  Ties break toward the lowest label.
"""

from dataclasses import dataclass, replace

import numpy as np

from .atomic import AtomicSet, Partition
from .errors import (
    DimensionMismatch,
    EmptyQuerySet,
    InconsistentModalities,
    IndexOutOfRange,
    NotSPD,
)
from .modal import ModalLoss, _mrlf_raw
from .numkit import as_matrix, as_vector, solve_spd
from .solver import (
    SolverConfig,
    SquaredLoss,
    solve_ar_squared,
    solve_ar_squared_multimodal,
    solve_crc,
    solve_mrar,
    solve_mrar_multimodal,
)

UNIMODAL_METHODS = ("MRSRC", "MRBSRC", "MRCRC", "SRC", "BSRC", "CRC", "LRC")
MULTIMODAL_METHODS = ("MRJSRC", "JSRC")
METHODS = UNIMODAL_METHODS + MULTIMODAL_METHODS


@dataclass(frozen=True)
class Dictionary:
    """Unit-norm atom matrix with one class label per column."""

    atoms: np.ndarray
    class_of: np.ndarray
    n_classes: int

    def __post_init__(self):
        A = as_matrix(self.atoms, "atoms")
        labels = np.asarray(self.class_of)
        if labels.ndim != 1 or labels.shape[0] != A.shape[1]:
            raise DimensionMismatch("need one class label per dictionary column")
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.floor(labels)):
                raise ValueError("class labels must be integers")
        labels = labels.astype(np.int64)
        if A.shape[1] == 0:
            raise DimensionMismatch("dictionary has no columns")
        norms = np.linalg.norm(A, axis=0)
        if np.max(np.abs(norms - 1.0)) > 1e-8:
            raise ValueError("dictionary columns must have unit norm (within 1e-8)")
        K = int(self.n_classes)
        if K < 1:
            raise ValueError("need at least one class")
        present = np.unique(labels)
        if present[0] < 0 or present[-1] >= K:
            raise ValueError(f"labels must lie in 0..{K - 1}")
        if present.size != K:
            raise ValueError("every class must own at least one dictionary column")
        object.__setattr__(self, "atoms", A)
        object.__setattr__(self, "class_of", labels)
        object.__setattr__(self, "n_classes", K)

    @classmethod
    def from_samples(cls, samples, labels):
        """Normalize sample columns to unit norm and wrap them up."""
        A = as_matrix(samples, "samples").copy()
        norms = np.linalg.norm(A, axis=0)
        if np.any(norms == 0.0):
            raise ValueError("cannot normalize a zero sample column")
        A /= norms[None, :]
        labels = np.asarray(labels, dtype=np.int64)
        K = int(labels.max()) + 1 if labels.size else 0
        return cls(A, labels, K)

    @property
    def n_atoms(self):
        return self.atoms.shape[1]

    def columns_of_class(self, k):
        if not (0 <= int(k) < self.n_classes):
            raise IndexOutOfRange(f"class {k} outside 0..{self.n_classes - 1}")
        return np.flatnonzero(self.class_of == int(k))


@dataclass(frozen=True)
class ClassifierSpec:
    """Method choice plus regularization; solver settings are optional.

    ``loss`` overrides the method's default data term (modal for MR methods,
    squared otherwise); ``solver`` supplies mu/epsilon/iteration limits, and
    its lam/loss fields are replaced by the ones given here.
    """

    method: str
    lam: float = 1e-3
    loss: object = None
    solver: SolverConfig | None = None
    block_partition: Partition | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {METHODS}"
            )
        if not (self.lam > 0.0):
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.loss is not None and not isinstance(self.loss, (ModalLoss, SquaredLoss)):
            raise TypeError("loss must be ModalLoss, SquaredLoss, or None")


@dataclass(frozen=True)
class ClassificationResult:
    label: int
    residuals: np.ndarray
    coefficients: np.ndarray
    iterations: int = 0
    converged: bool = True


def restrict_to_class(c, dictionary, k):
    """Copy of c with every coefficient outside class k zeroed."""
    c = as_vector(c, "coefficients")
    if c.shape[0] != dictionary.n_atoms:
        raise DimensionMismatch(
            f"coefficient length {c.shape[0]} does not match dictionary "
            f"({dictionary.n_atoms} atoms)"
        )
    cols = dictionary.columns_of_class(k)
    out = np.zeros_like(c)
    out[cols] = c[cols]
    return out


def _effective_loss(spec):
    if spec.loss is not None:
        return spec.loss
    if spec.method.startswith("MR"):
        return ModalLoss.adaptive()
    return SquaredLoss()


def _solver_config(spec, loss):
    base = spec.solver if spec.solver is not None else SolverConfig()
    return replace(base, lam=spec.lam, loss=loss)


def _atomic_set(spec, dictionary):
    stem = spec.method[2:] if spec.method.startswith("MR") else spec.method
    if stem == "SRC":
        return AtomicSet.sparse()
    if stem == "CRC":
        return AtomicSet.collaborative()
    if stem == "BSRC":
        part = spec.block_partition
        if part is None:
            part = Partition.from_labels(dictionary.class_of)
        if part.size != dictionary.n_atoms:
            raise DimensionMismatch(
                "block partition size does not match the dictionary"
            )
        return AtomicSet.block(part)
    raise ValueError(f"no atomic set for method {spec.method!r}")


def _class_residuals(dictionary, y, coeffs, sigma):
    """Per-class reconstruction residuals; modal loss when sigma is given."""
    K = dictionary.n_classes
    res = np.empty(K)
    for k in range(K):
        cols = dictionary.columns_of_class(k)
        r = y - dictionary.atoms[:, cols] @ coeffs[cols]
        res[k] = _mrlf_raw(r, sigma) if sigma is not None else float(np.linalg.norm(r))
    return res


def classify(dictionary, y, spec):
    """Label a single query vector with any unimodal method."""
    y = as_vector(y, "query")
    if y.shape[0] != dictionary.atoms.shape[0]:
        raise DimensionMismatch(
            f"query length {y.shape[0]} does not match dictionary rows "
            f"{dictionary.atoms.shape[0]}"
        )
    if spec.method in MULTIMODAL_METHODS:
        raise ValueError(f"{spec.method} requires classify_multimodal")
    if spec.method == "LRC":
        return classify_lrc(dictionary, y)
    if spec.method == "CRC":
        c = solve_crc(dictionary.atoms, y, spec.lam)
        res = _class_residuals(dictionary, y, c, None)
        return ClassificationResult(int(np.argmin(res)), res, c, 0, True)
    loss = _effective_loss(spec)
    cfg = _solver_config(spec, loss)
    aset = _atomic_set(spec, dictionary)
    if isinstance(loss, ModalLoss):
        out = solve_mrar(dictionary.atoms, y, aset, cfg)
        res = _class_residuals(dictionary, y, out.coefficients, out.sigma)
    else:
        out = solve_ar_squared(dictionary.atoms, y, aset, cfg)
        res = _class_residuals(dictionary, y, out.coefficients, None)
    return ClassificationResult(
        int(np.argmin(res)), res, out.coefficients, out.iterations, out.converged
    )


def _lrc_fit(Ak, y):
    # normal equations with a tiny ridge fallback for singular class blocks
    G = Ak.T @ Ak
    b = Ak.T @ y
    try:
        return solve_spd(G, b)
    except NotSPD:
        return solve_spd(G + 1e-10 * np.eye(G.shape[0]), b)


def classify_lrc(dictionary, y):
    """Per-class least-squares projection; nearest subspace wins.

    The returned coefficients embed the winning class's fit into a full
    dictionary-length vector, zeros elsewhere.
    """
    y = as_vector(y, "query")
    A = dictionary.atoms
    if y.shape[0] != A.shape[0]:
        raise DimensionMismatch("query length does not match dictionary rows")
    K = dictionary.n_classes
    res = np.empty(K)
    fits = []
    for k in range(K):
        cols = dictionary.columns_of_class(k)
        ck = _lrc_fit(A[:, cols], y)
        fits.append((cols, ck))
        res[k] = float(np.linalg.norm(y - A[:, cols] @ ck))
    label = int(np.argmin(res))
    cols, ck = fits[label]
    coeffs = np.zeros(dictionary.n_atoms)
    coeffs[cols] = ck
    return ClassificationResult(label, res, coeffs, 0, True)


def classify_multimodal(dictionaries, ys, spec):
    """Label a multi-view query with MRJSRC or JSRC.

    All per-modality dictionaries must agree on atom count, labels, and class
    count; the per-class residual sums the per-modality residuals.
    """
    if spec.method not in MULTIMODAL_METHODS:
        raise ValueError(f"{spec.method} is not a multimodal method")
    if len(dictionaries) == 0:
        raise EmptyQuerySet("need at least one modality")
    if len(dictionaries) != len(ys):
        raise InconsistentModalities(
            f"got {len(dictionaries)} dictionaries and {len(ys)} queries"
        )
    first = dictionaries[0]
    for d in dictionaries[1:]:
        if d.n_atoms != first.n_atoms or d.n_classes != first.n_classes:
            raise InconsistentModalities("modalities disagree on dictionary shape")
        if not np.array_equal(d.class_of, first.class_of):
            raise InconsistentModalities("modalities disagree on column labels")
    ys = [as_vector(y, "query") for y in ys]
    for d, y in zip(dictionaries, ys):
        if y.shape[0] != d.atoms.shape[0]:
            raise DimensionMismatch("query length does not match its dictionary")
    loss = _effective_loss(spec)
    cfg = _solver_config(spec, loss)
    aset = AtomicSet.joint_rows()
    Xs = [d.atoms for d in dictionaries]
    if isinstance(loss, ModalLoss):
        out = solve_mrar_multimodal(Xs, ys, aset, cfg)
        sigmas = out.sigma
    else:
        out = solve_ar_squared_multimodal(Xs, ys, aset, cfg)
        sigmas = None
    K = first.n_classes
    res = np.zeros(K)
    for k in range(K):
        cols = first.columns_of_class(k)
        for j, (d, y) in enumerate(zip(dictionaries, ys)):
            r = y - d.atoms[:, cols] @ out.coefficients[cols, j]
            if sigmas is not None:
                res[k] += _mrlf_raw(r, float(sigmas[j]))
            else:
                res[k] += float(np.linalg.norm(r))
    return ClassificationResult(
        int(np.argmin(res)), res, out.coefficients, out.iterations, out.converged
    )


def classify_set(dictionary, frames, spec):
    """Label an image set: classify each frame, average the residual vectors."""
    F = as_matrix(frames, "frames")
    if F.shape[1] == 0:
        raise EmptyQuerySet("image set has no frames")
    if F.shape[0] != dictionary.atoms.shape[0]:
        raise DimensionMismatch("frame length does not match dictionary rows")
    total = np.zeros(dictionary.n_classes)
    coeffs = []
    iterations = 0
    converged = True
    for t in range(F.shape[1]):
        r = classify(dictionary, F[:, t], spec)
        total += r.residuals
        coeffs.append(r.coefficients)
        iterations += r.iterations
        converged = converged and r.converged
    mean_res = total / F.shape[1]
    return ClassificationResult(
        int(np.argmin(mean_res)), mean_res, np.column_stack(coeffs), iterations, converged
    )
