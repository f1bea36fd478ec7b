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

import sys

from lpvfdi.public import fdi_main


def main(arg=None):
    """This is an entry point into fdi.

    We need this because entry_point in setuptools must not take any arguments.
    """
    return fdi_main.main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
