"""
Fourth-order joint cumulants of the measurements.

    kappa[i, j, k, l] = cum(r_i, r_j^*, r_k, r_l^*)

estimated with the plug-in moment estimator. The estimator assumes proper
(circular) snapshots, so the E[r_i r_k] E[r_j^* r_l^*] term is dropped; the
table records whether the data look improper.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from array_model.exceptions import DomainError

# pseudo-covariance entries above this many standard errors count as improper
PROPERNESS_THRESHOLD = 5.0


@dataclass(frozen=True, eq=False)
class CumulantTable:
    kappa: np.ndarray
    sample_size: int
    properness_violated: bool = False

    @property
    def num_sensors(self) -> int:
        return self.kappa.shape[0]

    def __getitem__(self, index):
        return self.kappa[index]

    @classmethod
    def zeros(cls, num_sensors: int, sample_size: int) -> CumulantTable:
        return cls(np.zeros((num_sensors,) * 4, dtype=complex), sample_size)


def _snapshot_array(snapshots) -> np.ndarray:
    return np.asarray(getattr(snapshots, 'data', snapshots), dtype=complex)


def is_improper(data: np.ndarray) -> bool:
    """Compare the empirical pseudo-covariance with its sampling spread under properness."""
    T = data.shape[1]
    pseudo = data @ data.T / T
    scale = np.mean(np.real(np.einsum('it,it->i', data, data.conj()))) / T
    return bool(np.max(np.abs(pseudo)) > PROPERNESS_THRESHOLD * scale / np.sqrt(T))


def estimate_cumulants(snapshots) -> CumulantTable:
    """
    kappa_hat[i,j,k,l] = (1/T) sum_t r_i r_j^* r_k r_l^* - R_ij R_kl - R_il R_kj.

    Raises:
        DomainError: If fewer than two snapshots are available.
    """
    r = _snapshot_array(snapshots)
    if r.ndim != 2:
        raise DomainError('Snapshots must be an M x T matrix.')
    T = r.shape[1]
    if T < 2:
        raise DomainError('Cumulant estimation needs at least two snapshots.')

    R = r @ r.conj().T / T
    # products[i, j, t] = r_i[t] r_j^*[t]
    products = r[:, None, :] * r.conj()[None, :, :]
    fourth_moment = np.tensordot(products, products, axes=([2], [2])) / T

    kappa = fourth_moment - np.einsum('ij,kl->ijkl', R, R) - np.einsum('il,kj->ijkl', R, R)
    return CumulantTable(kappa, T, properness_violated=is_improper(r))
