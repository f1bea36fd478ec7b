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

from setuptools import setup
from setuptools import find_packages

install_requires = [
    'numpy',
    'scipy',
    'python-dateutil',
    'protobuf>=4.24',
]

tests_require = [
    'mock',
]

setup(
    name='lpvfdi',
    version='0.1',
    description='LPV fault estimation filters with a lane keeping case study',
    license='Apache2.0',
    packages=find_packages(exclude=['examples', 'examples.*']),
    include_package_data=False,
    package_data={'lpvfdi.public': ['data/*.config']},
    install_requires=install_requires,
    tests_require=tests_require,
    extras_require={'test': tests_require},
    entry_points={
        'console_scripts': [
            'fdi = lpvfdi.public.__main__:main'
        ]
    }
)
