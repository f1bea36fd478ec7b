#!/usr/bin/env python
#
# Copyright 2024 - The lpvfdi Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Common Utilities.

The following code is copied from chromite with modifications.
  - class TempDir: chromite/lib/osutils.py

"""

import errno
import hashlib
import logging
import os
import shutil
import tempfile

from lpvfdi.public import errors

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "FDI_THREADS"
_DIGEST_CHUNK_SIZE = 1 << 16


class TempDir(object):
    """Object that creates a temporary directory.

    This object can either be used as a context manager or just as a simple
    object. The temporary directory is stored as self.tempdir in the object, and
    is returned as a string by a 'with' statement.
    """

    def __init__(self, prefix="fdi", base_dir=None, delete=True):
        """Constructor. Creates the temporary directory.

        Args:
            prefix: See tempfile.mkdtemp documentation.
            base_dir: The directory to place the temporary directory.
                      If None, will choose from system default tmp dir.
            delete: Whether the temporary dir is deleted on cleanup.
        """
        self.delete = delete
        self.tempdir = tempfile.mkdtemp(prefix=prefix, dir=base_dir)
        os.chmod(self.tempdir, 0o700)

    def Cleanup(self):
        """Clean up the temporary directory."""
        tempdir = getattr(self, "tempdir", None)
        if tempdir is not None and self.delete:
            try:
                shutil.rmtree(tempdir)
            except EnvironmentError as e:
                if e.errno != errno.ENOENT:
                    raise
            finally:
                self.tempdir = None

    def __enter__(self):
        """Return the temporary directory."""
        return self.tempdir

    def __exit__(self, exc_type, exc_value, exc_traceback):
        """Exit the context manager."""
        try:
            self.Cleanup()
        except Exception:  # pylint: disable=W0703
            if exc_type:
                # Keep the original exception, only log ours.
                logger.error("While exiting %s:", self, exc_info=True)
            else:
                raise

    def __del__(self):
        """Delete the object."""
        self.Cleanup()


def Sha256File(path):
    """Computes the hex sha256 digest of a file.

    Args:
        path: Path to the file.

    Returns:
        A hex string.
    """
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(_DIGEST_CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.hexdigest()


def GetThreadCount(environ=None):
    """Reads the bench thread cap from FDI_THREADS.

    Args:
        environ: A mapping to read from, os.environ if None.

    Returns:
        A positive integer, 1 when the variable is unset.

    Raises:
        errors.CommandArgError: If the variable is not a positive integer.
    """
    environ = os.environ if environ is None else environ
    value = environ.get(THREADS_ENV_VAR, "").strip()
    if not value:
        return 1
    try:
        threads = int(value)
    except ValueError:
        raise errors.CommandArgError(
            "%s must be a positive integer, got %r" % (THREADS_ENV_VAR, value))
    if threads < 1:
        raise errors.CommandArgError(
            "%s must be a positive integer, got %d" % (THREADS_ENV_VAR,
                                                       threads))
    return threads
