#!/usr/bin/env python3
"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""

import setuptools
from pathlib import Path as path
from warpcone import __version__

readme_contents = path('./README.md').read_text()
requirements = path('./requirements.txt').read_text().splitlines()
packages=setuptools.find_packages(include=['warpcone'])

setuptools.setup(
    name='warpcone',
    version=__version__,
    author='warpcone developers',
    license='BSD',
    description='Warped cones, CAT(K) checks and cone-off filling conditions',
    long_description=readme_contents,
    long_description_content_type='text/markdown',
    keywords='warped product cone CAT(K) geodesic relative hyperbolicity cone-off',
    install_requires=requirements,
    extras_require={
        'test': ['hypothesis>=6.0'],
    },
    packages=packages,
    classifiers=[
        'Programming Language :: Python :: 3.8',
        'Operating System :: OS Independent',
        'Environment :: Console',
        'License :: OSI Approved :: BSD License',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Development Status :: 3 - Alpha',
    ],
    entry_points={
        'console_scripts': [
            'warpcone=warpcone.cli:main',
        ],
    },
    python_requires='>=3.8'
)
