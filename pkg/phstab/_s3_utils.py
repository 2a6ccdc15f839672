import os
from typing import List

import boto3
import botocore


def s3_bucket_exists(name: str) -> bool:
    s3 = boto3.client("s3")
    try:
        s3.head_bucket(Bucket=name)
    except botocore.exceptions.ClientError as e:
        print(e)
        return False
    return True


def s3_file_exists(s3_client, bucket_name: str, s3_object_path: str) -> bool:
    try:
        s3_client.head_object(Bucket=bucket_name, Key=s3_object_path)
    except botocore.exceptions.ClientError as e:
        if e.response["Error"]["Code"] in ("404", "NoSuchKey", "NotFound"):
            return False
        raise
    return True


def s3_upload_files(
    bucket_name: str,
    files_to_send: List[str],
    s3_destination_object_dir: str,
    overwrite: bool = True,
) -> List[str]:
    """Upload local files under a prefix; returns the object keys written."""
    s3 = boto3.client("s3")
    uploaded = []
    for file_index, file_to_send in enumerate(files_to_send):
        s3_destination_object_path = "/".join(
            [s3_destination_object_dir, os.path.basename(file_to_send)]
        )
        try:
            if not overwrite and s3_file_exists(s3, bucket_name, s3_destination_object_path):
                print(
                    "S3 object already exists %s:%s, %i/%i"
                    % (
                        bucket_name,
                        s3_destination_object_path,
                        file_index + 1,
                        len(files_to_send),
                    )
                )
                continue
            print(
                "Uploading file to %s:%s, %i/%i"
                % (
                    bucket_name,
                    s3_destination_object_path,
                    file_index + 1,
                    len(files_to_send),
                )
            )
            s3.upload_file(file_to_send, bucket_name, s3_destination_object_path)
            uploaded.append(s3_destination_object_path)
        except botocore.exceptions.ClientError as e:
            print(e)
            continue
    return uploaded


def publish_outputs(
    bucket_name: str, s3_data_dir: str, run_name: str, files: List[str]
) -> List[str]:
    """Reports and series of one command go to <s3_data_dir>/<run_name>/."""
    existing = [f for f in files if os.path.isfile(f)]
    return s3_upload_files(bucket_name, existing, "/".join([s3_data_dir, run_name]))
