"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""


class PreconditionError(ValueError):
    ''' Invalid input: violated operation precondition or malformed descriptor '''

    def __init__(self, reason: str, msg: str = ''):
        self.reason = reason
        self.msg = msg
        super().__init__(f'{reason}: {msg}' if msg else reason)


class SolverError(RuntimeError):
    ''' Numerical breakdown inside a solver '''

    def __init__(self, reason: str, msg: str = ''):
        self.reason = reason
        self.msg = msg
        super().__init__(f'{reason}: {msg}' if msg else reason)
