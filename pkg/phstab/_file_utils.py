from typing import Any, Iterable, List, Sequence
import csv
import json
import os


def create_output_dir(dir_name) -> bool:
    if os.path.isdir(dir_name):
        return True
    print("Creating output directory: %s" % dir_name)
    try:
        os.makedirs(dir_name)
    except OSError:
        print("Creation of the directory %s failed" % dir_name)
        return False
    print("Successfully created the directory %s " % dir_name)
    return True


def get_files_from_dir(dir_path: str, file_type: str = None) -> List[str]:
    if not os.path.isdir(dir_path):
        return []
    file_names = sorted(
        f for f in os.listdir(dir_path) if os.path.isfile(os.path.join(dir_path, f))
    )
    if file_type is not None:
        file_names = [f for f in file_names if f.lower().endswith(file_type.lower())]
    return file_names


def write_json(file_path: str, payload: Any) -> str:
    with open(file_path, "w") as json_file:
        json.dump(payload, json_file, indent=2, sort_keys=False, allow_nan=False)
        json_file.write("\n")
    return file_path


def read_json(file_path: str) -> Any:
    with open(file_path, "r") as json_file:
        return json.load(json_file)


def write_csv(
    file_path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> str:
    with open(file_path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(value) for value in row])
    return file_path


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)
