import json
import os

import pandas as pd

SCAN_TAIL = ["herglotz_margin", "sym_residual", "error"]
LEDGER_KEYS = ["problem", "spec", "check"]


def scan_columns(dim: int) -> list[str]:
    """z_re, z_im, M11_re, M11_im, ..., herglotz_margin, sym_residual, error."""
    columns = ["z_re", "z_im"]
    for m in range(1, dim + 1):
        for n in range(1, dim + 1):
            columns += [f"M{m}{n}_re", f"M{m}{n}_im"]
    return columns + SCAN_TAIL


def to_frame(rows: list[dict], columns: list[str] | None = None) -> pd.DataFrame:
    df = pd.DataFrame(rows)
    if columns is not None:
        df = df.reindex(columns=columns)
    return df


def render(df: pd.DataFrame, fmt: str = "csv") -> str:
    if fmt == "csv":
        return df.to_csv(index=False, float_format="%.17g")
    if fmt == "json":
        records = json.loads(df.to_json(orient="records", double_precision=15))
        return json.dumps(records, indent=2) + "\n"
    raise ValueError(f"Unknown output format {fmt!r}.")


def write_table(df: pd.DataFrame, path: str | None = None, fmt: str = "csv"):
    """Writes to path, or prints when no path is given."""
    text = render(df, fmt)
    if path is None:
        print(text, end="")
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def read_table(path: str) -> pd.DataFrame:
    if path.endswith(".json"):
        return pd.read_json(path, orient="records")
    return pd.read_csv(path)


def update_report(rows: list[dict], path: str = "reports/report.csv", key_columns: list[str] = LEDGER_KEYS):
    """Upserts validation rows into a ledger CSV keyed by key_columns."""
    if os.path.exists(path):
        df = pd.read_csv(path)
    else:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        df = pd.DataFrame(columns=list(key_columns))
    for row in rows:
        key = {k: row[k] for k in key_columns}
        if df.empty:
            mask = pd.Series(dtype=bool)
        else:
            mask = (df[key_columns].astype(str) == pd.Series({k: str(v) for k, v in key.items()})).all(axis=1)
        if mask.any():
            for column, value in row.items():
                if column not in df.columns:
                    df[column] = None
                df.loc[mask, column] = value
        else:
            df_new = pd.DataFrame(row, index=[0])
            df = df_new if df.empty else pd.concat([df, df_new], ignore_index=True)
    df.to_csv(path, index=False)
    return df
