"""
结果文件持久化模块
提供原子写入、JSONL/CSV表格、JSON旁路文件以及Fourier场的二进制容器
"""
import csv
import io
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from hpw.models.spectral import FourierField, QuadratureMeta, SpectralOperator, SpectralParameter
from hpw.utils.logger import Logger
from hpw.utils.response import SidecarError, dumps_record

logger = Logger(__name__)

PathLike = Union[str, Path]

FIELD_MAGIC = b"HPWF"
FIELD_VERSION = 1
_PREFIX = struct.Struct("<4sII")


def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    """
    原子写入：先写同目录临时文件，再os.replace到目标路径

    Args:
        path: 目标路径（父目录不存在时自动创建）
        payload: 文件内容

    Returns:
        Path: 目标路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def write_jsonl(path: PathLike, records: Iterable[Any]) -> Path:
    """每行一条确定性JSON记录"""
    lines = [dumps_record(record) for record in records]
    return atomic_write_text(path, "".join(line + "\n" for line in lines))


def read_jsonl(path: PathLike) -> List[Dict[str, Any]]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _csv_cell(value: Any) -> Any:
    if isinstance(value, (list, tuple, dict)):
        return dumps_record(value)
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if value is None:
        return ""
    return value


def write_csv(path: PathLike, rows: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> Path:
    """
    UTF-8 CSV，带表头

    Args:
        path: 目标路径
        rows: 字典行
        columns: 列顺序，缺省为首行的键顺序
    """
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(col)) for col in columns])
    return atomic_write_text(path, buffer.getvalue())


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_json_sidecar(path: PathLike, payload: Any) -> Path:
    """键排序的JSON旁路文件（单行加换行，字节级可复现）"""
    return atomic_write_text(path, dumps_record(payload) + "\n")


def read_json_sidecar(path: PathLike, required: Sequence[str] = ()) -> Dict[str, Any]:
    """
    读取JSON旁路文件

    Args:
        path: 文件路径
        required: 必须存在的顶层键

    Raises:
        SidecarError: 文件缺失、不是JSON对象或缺少必需键
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SidecarError(f"旁路文件不存在: {path}")
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SidecarError(f"旁路文件损坏: {path}: {e}")
    if not isinstance(data, dict):
        raise SidecarError(f"旁路文件内容必须是JSON对象: {path}")
    missing = [key for key in required if key not in data]
    if missing:
        raise SidecarError(f"旁路文件缺少字段: {missing}", errors=[{"field": k, "message": "missing"} for k in missing])
    return data


# ---------------------------------------------------------------- Fourier场容器

def _field_header(field: FourierField) -> Dict[str, Any]:
    first = field.nodes[0] if field.nodes else None
    return {
        "descriptor_hash": field.descriptor_hash,
        "cutoff": field.cutoff,
        "grid_spec": field.grid_spec,
        "node_count": field.size,
        "dimension": field.ops[0].dimension if field.ops else 0,
        "n": first.n if first else 0,
        "k": first.k if first else 0,
        "pfaffian_weighted": field.pfaffian_weighted,
        "nodes": [
            {"eta": list(sp.eta), "orientation": sp.orientation, "basis": sp.basis.tolist()}
            for sp in field.nodes
        ],
        "meta": [op.meta.model_dump(mode="json") if op.meta else None for op in field.ops],
    }


def encode_field(field: FourierField) -> bytes:
    """
    Fourier场的版本化二进制编码

    布局：魔数HPWF | uint32版本 | uint32头长度 | JSON头 |
    每个节点：λ（k个小端double）、权重（double）、矩阵（小端complex128，行优先）
    """
    header = dumps_record(_field_header(field)).encode("utf-8")
    parts = [_PREFIX.pack(FIELD_MAGIC, FIELD_VERSION, len(header)), header]
    for sp, w, op in zip(field.nodes, field.weights, field.ops):
        parts.append(np.asarray(sp.lam, dtype="<f8").tobytes())
        parts.append(np.asarray([w], dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(op.entries, dtype="<c16").tobytes())
    return b"".join(parts)


def _parse_header(data: bytes) -> Tuple[Dict[str, Any], int]:
    if len(data) < _PREFIX.size:
        raise SidecarError("Fourier场容器过短")
    magic, version, length = _PREFIX.unpack_from(data)
    if magic != FIELD_MAGIC:
        raise SidecarError(f"Fourier场容器魔数错误: {magic!r}")
    if version != FIELD_VERSION:
        raise SidecarError(f"不支持的Fourier场容器版本: {version}")
    start = _PREFIX.size
    try:
        header = json.loads(data[start:start + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SidecarError(f"Fourier场容器头损坏: {e}")
    return header, start + length


def _build_field(header: Dict[str, Any], lams: List[List[float]], weights: List[float],
                 matrices: List[np.ndarray]) -> FourierField:
    nodes, ops = [], []
    for i, (lam, entries) in enumerate(zip(lams, matrices)):
        info = header["nodes"][i]
        sp = SpectralParameter(
            lam=tuple(lam),
            eta=tuple(info["eta"]),
            pfaffian=float(np.prod(info["eta"])),
            orientation=info["orientation"],
            basis=np.array(info["basis"], dtype=float),
        )
        meta = header["meta"][i]
        nodes.append(sp)
        ops.append(SpectralOperator(
            sp=sp,
            cutoff=header["cutoff"],
            entries=entries,
            meta=QuadratureMeta(**meta) if meta else None,
        ))
    return FourierField(
        nodes=nodes,
        weights=np.array(weights, dtype=float),
        ops=ops,
        pfaffian_weighted=header["pfaffian_weighted"],
        descriptor_hash=header["descriptor_hash"],
        grid_spec=header["grid_spec"],
    )


def decode_field(data: bytes) -> FourierField:
    """
    解码encode_field的输出

    Raises:
        SidecarError: 魔数、版本或长度不符
    """
    header, offset = _parse_header(data)
    count, dim, k = header["node_count"], header["dimension"], header["k"]
    record = 8 * k + 8 + 16 * dim * dim
    if len(data) - offset != count * record:
        raise SidecarError(f"Fourier场容器长度不符: 期望{count * record}字节负载，实际{len(data) - offset}")
    lams, weights, matrices = [], [], []
    for _ in range(count):
        lams.append(np.frombuffer(data, dtype="<f8", count=k, offset=offset).tolist())
        offset += 8 * k
        weights.append(float(np.frombuffer(data, dtype="<f8", count=1, offset=offset)[0]))
        offset += 8
        matrices.append(np.frombuffer(data, dtype="<c16", count=dim * dim, offset=offset).reshape(dim, dim).copy())
        offset += 16 * dim * dim
    try:
        return _build_field(header, lams, weights, matrices)
    except (KeyError, IndexError, ValueError) as e:
        raise SidecarError(f"Fourier场容器内容无效: {e}")


def save_field(path: PathLike, field: FourierField) -> Path:
    path = atomic_write_bytes(path, encode_field(field))
    logger.debug("写入Fourier场", {"path": str(path), "nodes": field.size})
    return path


def load_field(path: PathLike) -> FourierField:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise SidecarError(f"无法读取Fourier场: {path}: {e}")
    return decode_field(data)


def field_to_json(field: FourierField) -> str:
    """小规模Fourier场的JSON表示"""
    payload = _field_header(field)
    payload["lambdas"] = [list(sp.lam) for sp in field.nodes]
    payload["weights"] = field.weights.tolist()
    payload["entries"] = [{"re": op.entries.real.tolist(), "im": op.entries.imag.tolist()} for op in field.ops]
    return dumps_record(payload)


def field_from_json(text: str) -> FourierField:
    try:
        payload = json.loads(text)
        matrices = [np.array(e["re"], dtype=float) + 1j * np.array(e["im"], dtype=float) for e in payload["entries"]]
        return _build_field(payload, payload["lambdas"], payload["weights"], matrices)
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise SidecarError(f"Fourier场JSON无效: {e}")
