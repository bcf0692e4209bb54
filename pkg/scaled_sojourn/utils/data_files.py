import os
from typing import List

import pkg_resources


def _get_data_file_path(data_file):
    """
    Returns the absolute path to the required data files.

    :param data_file: relative path to the data file, relative to the scaled_sojourn/data path.
    So to get the path to data/scenarios/burst.scn you need to use data_file="scenarios/burst.scn"
    :return: absolute path of the data file
    """

    try:

        file_path = pkg_resources.resource_filename("scaled_sojourn", f"data/{data_file}")

    except KeyError:

        raise IOError(f"Could not read or find data file {data_file}. Try reinstalling scaled_sojourn.")

    else:

        return os.path.abspath(file_path)


def get_scenario_path(name: str) -> str:
    """
    Path of a bundled scenario given its name without the .scn suffix.
    """
    path = _get_data_file_path(f"scenarios/{name}.scn")
    if not os.path.exists(path):
        raise IOError(f"no bundled scenario named '{name}', have: {', '.join(list_scenarios())}")
    return path


def list_scenarios() -> List[str]:
    folder = _get_data_file_path("scenarios")
    return sorted(f[:-4] for f in os.listdir(folder) if f.endswith(".scn"))
