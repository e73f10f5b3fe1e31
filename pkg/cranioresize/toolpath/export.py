"""툴패스 내보내기와 읽기

waypoint-text: '#' 헤더 뒤에 한 줄에 "x y z i j k" (소수점 6자리)
gcode-like: ';' 주석 헤더, G90/G21 뒤에 "G1 X Y Z I J K" 이동 명령
"""
import numpy as np

from ..customerror import EmptyToolpathError, InvalidParamsError, MeshIoError, ParseError
from ..settings import logger
from .path import Toolpath, ToolParams

TOOLPATH_FORMATS = ("waypoint-text", "gcode-like")
_NO_FRAME = "-"
LOADED_TOLERANCE = 1e-5


def _number(value: float) -> str:
    return f"{value:.17g}"


def _header(toolpath: Toolpath, marker: str) -> list[str]:
    tool = toolpath.tool
    return [
        f"{marker} cranioresize toolpath",
        f"{marker} frame {toolpath.frame if toolpath.frame is not None else _NO_FRAME}",
        f"{marker} tool_radius {_number(tool.tool_radius)} tilt_angle {_number(tool.tilt_angle)} "
        f"cut_depth {_number(tool.cut_depth)}",
        f"{marker} step {_number(toolpath.step)}",
        f"{marker} plane_normal {' '.join(_number(v) for v in toolpath.plane_normal)}",
        f"{marker} center {' '.join(_number(v) for v in toolpath.center)}",
        f"{marker} count {len(toolpath)}",
    ]


def format_toolpath(toolpath: Toolpath, format: str = "waypoint-text") -> str:
    """툴패스를 텍스트로 만듭니다.

    Raises:
        EmptyToolpathError: 웨이포인트가 없는 경우
    """
    if format not in TOOLPATH_FORMATS:
        raise InvalidParamsError(f"지원하지 않는 툴패스 형식입니다: {format}")
    if not len(toolpath):
        raise EmptyToolpathError("웨이포인트가 없는 툴패스는 내보낼 수 없습니다.")

    rows = np.hstack([toolpath.positions, toolpath.axes])
    if format == "waypoint-text":
        lines = _header(toolpath, "#")
        lines += [" ".join(f"{value:.6f}" for value in row) for row in rows]
    else:
        lines = _header(toolpath, ";")
        lines += ["; feed: F word omitted, set by the operator", "G90", "G21"]
        lines += ["G1 X{:.6f} Y{:.6f} Z{:.6f} I{:.6f} J{:.6f} K{:.6f}".format(*row) for row in rows]
    return "\n".join(lines) + "\n"


def export_toolpath(toolpath: Toolpath, path: str, format: str = "waypoint-text"):
    text = format_toolpath(toolpath, format)
    try:
        with open(path, "w", encoding="ascii", newline="\n") as file:
            file.write(text)
    except OSError as error:
        raise MeshIoError(f"툴패스 파일을 쓸 수 없습니다: {path} ({error})") from error
    logger.info("툴패스 저장: %s (%s, 웨이포인트 %d개)", path, format, len(toolpath))


def parse_toolpath(text: str) -> Toolpath:
    """waypoint-text 또는 gcode-like 텍스트를 Toolpath로 읽습니다.

    6자리 반올림 때문에 공구축을 다시 정규화하고 허용오차를 1e-5로 둡니다.
    """
    header, rows = {}, []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line[0] in "#;":
            tokens = line[1:].split()
            if tokens and tokens[0] in ("frame", "step", "plane_normal", "center", "count", "tool_radius"):
                header[tokens[0]] = tokens[1:]
            continue
        if line.startswith("G1"):
            line = " ".join(token[1:] for token in line.split()[1:])
        elif line.startswith("G"):
            continue
        try:
            rows.append([float(value) for value in line.split()])
        except ValueError as error:
            raise ParseError(f"웨이포인트 행을 읽을 수 없습니다: {line}") from error

    try:
        tool_fields = header["tool_radius"]
        tool = ToolParams(
            tool_radius=float(tool_fields[0]), tilt_angle=float(tool_fields[2]), cut_depth=float(tool_fields[4]))
        frame = header["frame"][0]
        step = float(header["step"][0])
        normal = [float(v) for v in header["plane_normal"]]
        center = [float(v) for v in header["center"]]
        count = int(header["count"][0])
    except (KeyError, IndexError, ValueError) as error:
        raise ParseError(f"툴패스 헤더가 올바르지 않습니다: {error}") from error
    if len(rows) != count or any(len(row) != 6 for row in rows):
        raise ParseError(f"웨이포인트 개수가 헤더({count})와 다르거나 행 형식이 잘못되었습니다.")

    data = np.asarray(rows, dtype=np.float64).reshape(-1, 6)
    axes = data[:, 3:] / np.linalg.norm(data[:, 3:], axis=1)[:, None]
    return Toolpath(
        data[:, :3], axes, tool, normal, center, step,
        None if frame == _NO_FRAME else frame, tolerance=LOADED_TOLERANCE)


def load_toolpath(path: str) -> Toolpath:
    try:
        with open(path, "r", encoding="ascii") as file:
            text = file.read()
    except OSError as error:
        raise MeshIoError(f"툴패스 파일을 읽을 수 없습니다: {path} ({error})") from error
    return parse_toolpath(text)
