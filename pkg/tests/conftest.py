import pathlib
import sys

# make the oracle helpers importable as a plain module
sys.path.insert(0, str(pathlib.Path(__file__).parent))
