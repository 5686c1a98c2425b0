# -*- coding: utf-8 -*-
# vim: ts=4 sw=4 tw=88 et ai si
#
# License: GPLv2
#
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License, version 2,
# as published by the Free Software Foundation.
#
# This program is distributed in the hope that it will be useful, but
# WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the GNU
# General Public License for more details.

"""
This module allows opening and reading the text files this project consumes
(sample files, datasets, checkpoints, metric tables) and decompresses them
on-the-fly if needed. Annealer sample dumps for tens of thousands of chains
are large and usually shipped compressed. Supported file extensions are:
'gz', 'bz2' and 'xz'. The special path "-" stands for the standard input.
"""

import bz2
import gzip
import logging
import lzma
import os
import sys

from . import Helpers

_log = logging.getLogger(__name__)  # pylint: disable=C0103

# A list of supported compression types
SUPPORTED_COMPRESSION_TYPES = ("gz", "bz2", "xz")

_OPENERS = {
    "gz": gzip.open,
    "bz2": bz2.open,
    "xz": lzma.open,
}


class Error(Exception):
    """
    A class for exceptions generated by this module. We currently support only
    one type of exceptions, and we basically throw human-readable problem
    description in case of errors.
    """

    pass


class TransRead(object):
    """
    This class implements the transparent reading functionality. Instances of
    this class are text file-like objects which can be iterated line by line,
    whether the underlying file is compressed or not.
    """

    def __init__(self, filepath):
        """
        Class constructor. The 'filepath' argument is the path to the file to
        read, or "-" for the standard input.
        """

        self.name = filepath
        self.compression_type = "none"
        # Size of the file on disk (compressed size for compressed files)
        self.size = None
        self._f_obj = None
        self._needs_close = False

        if filepath == "-":
            self.name = "<stdin>"
            self._f_obj = sys.stdin
            return

        for ctype in SUPPORTED_COMPRESSION_TYPES:
            if filepath.endswith("." + ctype):
                self.compression_type = ctype
                break

        try:
            self.size = os.stat(filepath).st_size
            if self.compression_type == "none":
                self._f_obj = open(filepath, "rt", encoding="ascii")
            else:
                opener = _OPENERS[self.compression_type]
                self._f_obj = opener(filepath, "rt", encoding="ascii")
        except (IOError, OSError) as err:
            raise Error("cannot open file '%s': %s" % (filepath, err))
        self._needs_close = True

        _log.debug(
            "opened '%s' (%s, compression: %s)",
            filepath,
            Helpers.human_size(self.size),
            self.compression_type,
        )

    def __del__(self):
        """The class destructor which closes opened files."""
        if self._needs_close:
            self.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, exc_tb):
        self.close()
        return False

    def __iter__(self):
        try:
            for line in self._f_obj:
                yield line
        except (IOError, OSError, EOFError, lzma.LZMAError) as err:
            raise Error("error while reading '%s': %s" % (self.name, err))
        except UnicodeDecodeError as err:
            raise Error("'%s' is not an ASCII text file: %s" % (self.name, err))

    def read(self, size=-1):
        """Read the (decompressed) text, all of it by default."""
        try:
            return self._f_obj.read(size)
        except (IOError, OSError, EOFError, lzma.LZMAError) as err:
            raise Error("error while reading '%s': %s" % (self.name, err))

    def close(self):
        """Close the file."""
        if self._needs_close:
            self._f_obj.close()
            self._needs_close = False


def open_for_writing(filepath):
    """
    Open 'filepath' for writing text, compressing when the extension asks for
    it.
    """

    for ctype in SUPPORTED_COMPRESSION_TYPES:
        if filepath.endswith("." + ctype):
            opener = _OPENERS[ctype]
            break
    else:
        opener = open

    try:
        return opener(filepath, "wt", encoding="ascii")
    except (IOError, OSError) as err:
        raise Error("cannot open file '%s' for writing: %s" % (filepath, err))
