"""
Plain-text dumps of covariance matrices.

One CSV line per matrix row; each entry is written as its real part followed
by its imaginary part, so an M x M matrix takes 2M^2 reals.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from array_model.exceptions import ConfigurationError

from .covariance import CovarianceKind, HermitianCovariance


def covariance_rows(covariance: HermitianCovariance) -> list[list[str]]:
    interleaved = np.stack([covariance.matrix.real, covariance.matrix.imag], axis=-1)
    return [[repr(float(value)) for value in row.ravel()] for row in interleaved]


def write_covariance_csv(covariance: HermitianCovariance, path) -> Path:
    path = Path(path)
    try:
        with path.open('w', newline='', encoding='utf-8') as handle:
            csv.writer(handle, lineterminator='\n').writerows(covariance_rows(covariance))
    except OSError as exc:
        raise OSError(f'Cannot write covariance to {path}: {exc}') from exc
    return path


def read_covariance_csv(path, kind=CovarianceKind.RAW_SIGMA, sample_size=None) -> HermitianCovariance:
    """
    Read a matrix written by write_covariance_csv.

    Raises:
        ConfigurationError: If the file is missing or not a square interleaved matrix.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f'Covariance file not found: {path}')

    with path.open(newline='', encoding='utf-8') as handle:
        try:
            rows = [[float(value) for value in row] for row in csv.reader(handle) if row]
        except ValueError as exc:
            raise ConfigurationError(f'{path}: non-numeric entry ({exc}).') from exc

    M = len(rows)
    if M == 0 or any(len(row) != 2 * M for row in rows):
        raise ConfigurationError(f'{path}: expected {M} rows of {2 * M} values.')

    values = np.array(rows).reshape(M, M, 2)
    return HermitianCovariance(values[..., 0] + 1j * values[..., 1], kind, sample_size)
