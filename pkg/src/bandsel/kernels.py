"""Hot numeric kernels: batch greedy-pursuit solves and KNN prediction.

Both kernels exist twice: a numba ``@njit`` build (default when numba is
importable) and a pure-numpy fallback. The backend is picked from the
``BANDSEL_BACKEND`` environment variable ("numba", "numpy", or "auto") and
can be overridden at runtime with :func:`set_backend`; both paths implement
identical selection and tie-break rules, so results agree.

``BANDSEL_THREADS`` caps the numba thread pool (0 or unset = automatic).
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InvalidArgumentError

__all__ = ["active_backend", "set_backend", "omp_solve", "omp_solve_all", "knn_predict"]

# Relative correlation level below which an atom counts as uncorrelated with
# the residual; this is what stops a pursuit once the fit is numerically exact.
CORR_EPS = 1e-12

try:
    # The workqueue layer is always available and keeps stderr quiet on hosts
    # with an old TBB; it only affects how prange work is scheduled.
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    _HAVE_NUMBA = False

    def prange(*args):
        return range(*args)


_FORCED: str | None = None
_NUMBA_READY = False


def _configure_numba_threads() -> None:
    raw = os.environ.get("BANDSEL_THREADS", "").strip()
    if not raw:
        return
    try:
        want = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"BANDSEL_THREADS={raw!r} is not an integer")
    if want > 0:
        import numba

        numba.set_num_threads(min(want, numba.config.NUMBA_NUM_THREADS))


def set_backend(name: str | None) -> None:
    """Force "numba" or "numpy", or pass None to return to env selection."""
    global _FORCED
    if name is not None:
        name = name.lower()
        if name not in ("numba", "numpy"):
            raise InvalidArgumentError(f"unknown backend {name!r}")
        if name == "numba" and not _HAVE_NUMBA:
            raise InvalidArgumentError("numba backend requested but numba is not installed")
    _FORCED = name


def active_backend() -> str:
    """Resolve the kernel backend currently in effect."""
    global _NUMBA_READY
    if _FORCED is not None:
        choice = _FORCED
    else:
        env = os.environ.get("BANDSEL_BACKEND", "auto").strip().lower() or "auto"
        if env not in ("auto", "numba", "numpy"):
            raise InvalidArgumentError(f"BANDSEL_BACKEND={env!r} is not a known backend")
        if env == "numba" and not _HAVE_NUMBA:
            raise InvalidArgumentError("BANDSEL_BACKEND=numba but numba is not installed")
        choice = env
    if choice == "auto":
        choice = "numba" if _HAVE_NUMBA else "numpy"
    if choice == "numba" and not _NUMBA_READY:
        _configure_numba_threads()
        _NUMBA_READY = True
    return choice


def _omp_single(atoms, norms, y, excluded, max_atoms, tol):
    """Greedy pursuit of one target against row-stored atoms.

    atoms: (n_atoms, dim) row j = atom j; norms: per-atom L2 norms.
    Atom choice maximizes |<atom, residual>| / ||atom|| (selection is on
    normalized atoms; coefficients are fit against raw atoms). Ties go to
    the lowest atom index. Stops at max_atoms, at residual <= tol, or when
    no atom keeps a correlation above CORR_EPS * ||y||.

    Returns (support, coeffs, count, residual_norm) with fixed-size output
    arrays; only the first `count` entries are meaningful.
    """
    # Parallel type inference can demote layouts to "any"; pin them back so
    # the matvec below stays on the fast contiguous path (no-op copies).
    atoms = np.ascontiguousarray(atoms)
    y = np.ascontiguousarray(y)
    dim = y.shape[0]
    support = np.empty(max_atoms, dtype=np.int64)
    coeffs = np.zeros(max_atoms, dtype=np.float64)
    y_norm = np.sqrt(y @ y)
    corr_floor = CORR_EPS * y_norm

    usable = norms > 0.0
    if excluded >= 0:
        usable[excluded] = False
    safe_norms = np.where(norms > 0.0, norms, 1.0)

    basis = np.empty((dim, max_atoms), dtype=np.float64)
    resid = y.copy()
    resid_norm = y_norm
    count = 0
    while count < max_atoms and resid_norm > tol:
        scores = np.where(usable, np.abs(atoms @ resid) / safe_norms, -1.0)
        best = int(np.argmax(scores))
        if scores[best] <= corr_floor:
            break
        usable[best] = False
        support[count] = best
        basis[:, count] = atoms[best]
        count += 1
        if count == 1:
            atom = atoms[best]
            c0 = (atom @ y) / (atom @ atom)
            coeffs[0] = c0
            resid = y - c0 * atom
        else:
            sub = np.ascontiguousarray(basis[:, :count])
            q, r = np.linalg.qr(sub)
            rhs = np.ascontiguousarray(q.T) @ y
            for i in range(count - 1, -1, -1):
                acc = rhs[i]
                for j in range(i + 1, count):
                    acc -= r[i, j] * coeffs[j]
                coeffs[i] = acc / r[i, i]
            resid = y - sub @ coeffs[:count]
        resid_norm = np.sqrt(resid @ resid)
    return support, coeffs, count, resid_norm


def _omp_batch_numpy(atoms, norms, max_atoms, tol):
    n_atoms = atoms.shape[0]
    x = np.zeros((n_atoms, n_atoms), dtype=np.float64)
    for i in range(n_atoms):
        support, coeffs, count, _ = _omp_single(atoms, norms, atoms[i], i, max_atoms, tol)
        x[support[:count], i] = coeffs[:count]
    return x


def _knn_numpy(train_x, train_y, test_x, k, n_classes):
    n_test, dim = test_x.shape
    n_train = train_x.shape[0]
    pred = np.empty(n_test, dtype=np.int64)
    # Bound the broadcast buffer to ~64 MB of float64.
    chunk = max(1, int(8_000_000 // max(1, n_train * dim)))
    for start in range(0, n_test, chunk):
        block = test_x[start : start + chunk]
        diff = block[:, None, :] - train_x[None, :, :]
        dist2 = (diff * diff).sum(axis=2)
        # Stable sort keeps equal distances in ascending train-row order.
        nearest = np.argsort(dist2, axis=1, kind="stable")[:, :k]
        for row in range(nearest.shape[0]):
            neigh = train_y[nearest[row]]
            votes = np.bincount(neigh, minlength=n_classes)
            top = votes.max()
            label = neigh[0]
            for cls in neigh:
                if votes[cls] == top:
                    label = cls
                    break
            pred[start + row] = label
    return pred


if _HAVE_NUMBA:
    _omp_single_nb = njit(cache=True)(_omp_single)

    @njit(cache=True, parallel=True)
    def _omp_batch_nb(atoms, norms, max_atoms, tol):
        n_atoms = atoms.shape[0]
        x = np.zeros((n_atoms, n_atoms), dtype=np.float64)
        for i in prange(n_atoms):
            support, coeffs, count, _ = _omp_single_nb(
                atoms, norms, atoms[i], i, max_atoms, tol
            )
            for j in range(count):
                x[support[j], i] = coeffs[j]
        return x

    @njit(cache=True, parallel=True)
    def _knn_nb(train_x, train_y, test_x, k, n_classes):
        n_test = test_x.shape[0]
        n_train = train_x.shape[0]
        dim = train_x.shape[1]
        pred = np.empty(n_test, dtype=np.int64)
        for t in prange(n_test):
            nd = np.full(k, np.inf)
            ni = np.full(k, -1, dtype=np.int64)
            for j in range(n_train):
                dist = 0.0
                for f in range(dim):
                    delta = test_x[t, f] - train_x[j, f]
                    dist += delta * delta
                if dist < nd[k - 1]:
                    # Shift strictly-worse entries up; equal distances keep
                    # the earlier (lower-index) train row first.
                    pos = k - 1
                    while pos > 0 and nd[pos - 1] > dist:
                        nd[pos] = nd[pos - 1]
                        ni[pos] = ni[pos - 1]
                        pos -= 1
                    nd[pos] = dist
                    ni[pos] = j
            votes = np.zeros(n_classes, dtype=np.int64)
            for j in range(k):
                votes[train_y[ni[j]]] += 1
            top = np.int64(0)
            for cls in range(n_classes):
                if votes[cls] > top:
                    top = votes[cls]
            label = train_y[ni[0]]
            for j in range(k):
                if votes[train_y[ni[j]]] == top:
                    label = train_y[ni[j]]
                    break
            pred[t] = label
        return pred


def _as_c64(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64))


def omp_solve(atoms, norms, y, excluded, max_atoms, tol):
    """Run one pursuit; returns (support, coeffs, residual_norm) trimmed."""
    atoms = _as_c64(atoms)
    norms = _as_c64(norms)
    y = _as_c64(y)
    if active_backend() == "numba":
        support, coeffs, count, resid_norm = _omp_single_nb(
            atoms, norms, y, excluded, max_atoms, tol
        )
    else:
        support, coeffs, count, resid_norm = _omp_single(
            atoms, norms, y, excluded, max_atoms, tol
        )
    return support[:count].copy(), coeffs[:count].copy(), float(resid_norm)


def omp_solve_all(atoms, norms, max_atoms, tol):
    """Pursue every atom against all the others; returns the coefficient matrix.

    Column i holds the coefficients representing atom i (its own row is
    forced out by exclusion, so the diagonal is exactly zero).
    """
    atoms = _as_c64(atoms)
    norms = _as_c64(norms)
    if active_backend() == "numba":
        return _omp_batch_nb(atoms, norms, max_atoms, tol)
    return _omp_batch_numpy(atoms, norms, max_atoms, tol)


def knn_predict(train_x, train_y, test_x, k, n_classes):
    """Majority-vote KNN with deterministic tie rules.

    Distance ties prefer the lower training-row index; vote ties go to the
    class of the nearest neighbor among the tied classes. Labels must be
    dense ints in [0, n_classes).
    """
    train_x = _as_c64(train_x)
    test_x = _as_c64(test_x)
    train_y = np.ascontiguousarray(np.asarray(train_y, dtype=np.int64))
    if active_backend() == "numba":
        return _knn_nb(train_x, train_y, test_x, k, n_classes)
    return _knn_numpy(train_x, train_y, test_x, k, n_classes)
