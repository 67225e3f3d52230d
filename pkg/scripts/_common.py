import argparse
import os


def parser(description, default_out):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=default_out, help="output directory")
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--threads", type=int, default=int(os.environ.get("UHLMANN_THREADS", "1")))
    return p


def ensure(path):
    os.makedirs(path, exist_ok=True)
    return path
