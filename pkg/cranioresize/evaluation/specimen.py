"""합성 결손 두개골 시편을 만드는 모듈입니다.

구면 캡 모양의 두 겹 껍질에서 무작위 극좌표 윤곽 안쪽을 잘라 결손부를 만들고,
잘라낸 부분을 평면 방향으로 margin만큼 넓힌 것을 크기가 큰 임플란트로 둡니다.
모든 메쉬는 같은 (ρ, θ) 격자에서 만들어지므로 결손부 가장자리와 정답 윤곽이 정점 단위로 일치합니다.

classes:
    SpecimenParams: 시편 생성 파라미터
    DefectSpecimen: 생성된 메쉬, 정답 윤곽, 기준점

functions:
    generate_specimen: 시드로부터 시편 생성
    make_scan: 스캐너 좌표계의 잡음 섞인 복사본 생성
    digitize_contour: 기구로 따라 그린 듯한 성긴 윤곽 점 생성
    save_specimen: 시편 파일 묶음 저장
"""
import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.spatial.transform import Rotation

from ..contour import ContourPointCloud, save_point_cloud
from ..customerror import InvalidParamsError
from ..meshcore import MESH_FORMATS, TriangleMesh, save_mesh
from ..meshcore.primitives import fan, ring_strip
from ..registration import LandmarkSet, RigidTransform, save_landmarks, save_transform
from ..settings import FRAME_CT, FRAME_SCAN, logger

SKULL_FIDUCIAL_ANGLES = (0.0, 120.0, 240.0)
IMPLANT_FIDUCIAL_ANGLES = (30.0, 150.0, 270.0)


class SpecimenParams(BaseModel):
    """시편 생성 파라미터 (단위 mm)

    Attributes:
        shell_radius (float): 바깥 구면 반지름
        shell_thickness (float): 껍질 두께, 임플란트 두께와 같습니다.
        contour_base_radius (float): 윤곽 반지름 r(θ)의 평균
        harmonic_amplitudes (list[float]): k번째 값이 (k+1)차 조화 성분의 진폭, 위상은 시드로 정합니다.
        implant_margin (float): 임플란트를 결손부보다 넓히는 폭
        crop_radius (float): 껍질을 자르는 수평 반지름
        edge_length (float): 목표 메쉬 엣지 길이
        noise_sigma (float): 스캔 정점 잡음 표준편차
        landmark_sigma (float): 스캔 랜드마크 선택 잡음 표준편차
        max_rotation_deg (float): 스캔 좌표계 무작위 회전의 최대 각도
        max_translation_mm (float): 스캔 좌표계 무작위 이동의 최대 크기
    """
    shell_radius: float = Field(80.0, gt=0)
    shell_thickness: float = Field(3.0, gt=0)
    contour_base_radius: float = Field(30.0, gt=0)
    harmonic_amplitudes: list[float] = Field(default_factory=lambda: [0.0, 3.0, 1.5])
    implant_margin: float = Field(5.0, gt=0)
    crop_radius: float = Field(60.0, gt=0)
    edge_length: float = Field(1.5, gt=0)
    noise_sigma: float = Field(0.05, ge=0)
    landmark_sigma: float = Field(0.2, ge=0)
    max_rotation_deg: float = Field(10.0, ge=0, le=90)
    max_translation_mm: float = Field(5.0, ge=0)


@dataclass
class DefectSpecimen:
    """생성된 시편

    Attributes:
        ct_model (TriangleMesh): 결손 전의 닫힌 두 겹 캡, 수술 전 CT 모델 역할
        defect_skull (TriangleMesh): 구멍과 구멍 벽을 가진 닫힌 껍질
        oversized_implant (TriangleMesh): 결손부보다 margin만큼 큰 닫힌 판
        ground_truth_contour (np.ndarray): 바깥 표면의 구멍 가장자리 정점 (k, 3)
        fiducials (LandmarkSet): 온전한 껍질 위 기준점 3개 (CT)
        implant_fiducials (LandmarkSet): 임플란트 윗면 마커 3개 (CT)
        scan (TriangleMesh): 스캐너 좌표계의 바깥 표면과 구멍 벽
        scan_landmarks (LandmarkSet): 스캔에서 고른 기준점 (scan)
        scan_to_ct (RigidTransform): 정답 scan -> CT 변환
        seed (int): 생성 시드
        params (SpecimenParams): 생성 파라미터
    """
    ct_model: TriangleMesh
    defect_skull: TriangleMesh
    oversized_implant: TriangleMesh
    ground_truth_contour: np.ndarray
    fiducials: LandmarkSet
    implant_fiducials: LandmarkSet
    seed: int
    params: SpecimenParams
    contour_radius: np.ndarray = field(repr=False, default=None)
    scan: Optional[TriangleMesh] = None
    scan_landmarks: Optional[LandmarkSet] = None
    scan_to_ct: Optional[RigidTransform] = None

    @property
    def cap_center(self) -> np.ndarray:
        """캡 꼭대기 바깥 표면 점, 결손부 중심 축 위에 있습니다."""
        return np.array([0.0, 0.0, self.params.shell_radius])


class _ShellGrid:
    """(ρ, θ) 링 격자와 두 겹 표면의 정점 번호 배치

    정점 배열은 [바깥 중심, 바깥 링 1..N, 안쪽 중심, 안쪽 링 1..N] 순서입니다.
    """

    def __init__(self, rho: np.ndarray, theta: np.ndarray, outer_radius: float, inner_radius: float):
        self.rho = rho
        self.theta = theta
        self.n_rings, self.n_sectors = rho.shape
        self.layer_size = 1 + self.n_rings * self.n_sectors
        self.vertices = np.vstack([self._layer(outer_radius), self._layer(inner_radius)])

    def _layer(self, radius: float) -> np.ndarray:
        x = self.rho * np.cos(self.theta)
        y = self.rho * np.sin(self.theta)
        z = np.sqrt(radius ** 2 - self.rho ** 2)
        ring_points = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
        return np.vstack([[0.0, 0.0, radius], ring_points])

    def ring(self, k: int, inner: bool = False) -> np.ndarray:
        base = self.layer_size if inner else 0
        if k == 0:
            return np.array([base])
        return base + 1 + (k - 1) * self.n_sectors + np.arange(self.n_sectors)

    def surface(self, first: int, last: int, inner: bool = False) -> np.ndarray:
        faces = []
        if first == 0:
            faces.append(fan(self.ring(0, inner)[0], self.ring(1, inner)))
            first = 1
        faces += [ring_strip(self.ring(k, inner), self.ring(k + 1, inner)) for k in range(first, last)]
        faces = np.vstack(faces)
        return faces[:, ::-1] if inner else faces

    def wall(self, k: int, levels: int, facing_axis: bool, extra: list) -> np.ndarray:
        """링 k의 바깥 정점과 안쪽 정점을 수직 벽으로 잇습니다.

        중간 층 정점은 extra에 추가되며, 번호는 기존 정점 배열 뒤에 이어 붙습니다.
        """
        top, bottom = self.ring(k), self.ring(k, inner=True)
        rings = [top]
        offset = len(self.vertices) + sum(len(block) for block in extra)
        for level in range(1, levels):
            weight = level / levels
            extra.append((1.0 - weight) * self.vertices[top] + weight * self.vertices[bottom])
            rings.append(offset + np.arange(self.n_sectors))
            offset += self.n_sectors
        rings.append(bottom)
        faces = [ring_strip(rings[i + 1], rings[i]) if facing_axis else ring_strip(rings[i], rings[i + 1])
                 for i in range(levels)]
        return np.vstack(faces)

    def mesh(self, faces: list, extra: list, frame: str) -> TriangleMesh:
        vertices = np.vstack([self.vertices] + extra) if extra else self.vertices
        faces = np.vstack(faces)
        used = np.zeros(len(vertices), dtype=bool)
        used[faces.reshape(-1)] = True
        return TriangleMesh(vertices, faces, frame=frame).submesh(used)


def _contour_radius(params: SpecimenParams, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    amplitudes = np.asarray(params.harmonic_amplitudes, dtype=np.float64)
    phases = rng.uniform(0.0, 2.0 * np.pi, len(amplitudes))
    radius = np.full_like(theta, params.contour_base_radius)
    for k, (amplitude, phase) in enumerate(zip(amplitudes, phases), start=1):
        radius += amplitude * np.cos(k * theta + phase)
    return radius


def _check_params(params: SpecimenParams, contour: np.ndarray):
    inner_radius = params.shell_radius - params.shell_thickness
    if inner_radius <= 0:
        raise InvalidParamsError("껍질 두께가 반지름보다 크거나 같습니다.")
    if params.crop_radius >= inner_radius - params.edge_length:
        raise InvalidParamsError(
            f"자르는 반지름 {params.crop_radius}가 안쪽 구면 반지름 {inner_radius}에 너무 가깝습니다.")
    if contour.min() <= 2.0 * params.edge_length:
        raise InvalidParamsError("윤곽 반지름이 0 이하로 내려가거나 엣지 길이보다 작아지는 구간이 있습니다.")
    if contour.max() + params.implant_margin >= params.crop_radius - params.edge_length:
        raise InvalidParamsError("임플란트가 잘린 껍질 범위를 벗어납니다. crop_radius를 늘리거나 윤곽을 줄이세요.")


def _ring_radii(params: SpecimenParams, contour: np.ndarray) -> tuple[np.ndarray, int, int]:
    edge = params.edge_length
    inner_count = max(2, int(round(params.contour_base_radius / edge)))
    margin_count = max(1, int(round(params.implant_margin / edge)))
    outer_count = max(1, int(round(
        (params.crop_radius - params.contour_base_radius - params.implant_margin) / edge)))

    steps = np.arange(1, inner_count + 1)[:, None] / inner_count
    inner = steps * contour
    margin = contour + (np.arange(1, margin_count + 1)[:, None] / margin_count) * params.implant_margin
    start = contour + params.implant_margin
    outer = start + (np.arange(1, outer_count + 1)[:, None] / outer_count) * (params.crop_radius - start)
    return np.vstack([inner, margin, outer]), inner_count, inner_count + margin_count


def _surface_point(params: SpecimenParams, rho: float, angle_deg: float) -> np.ndarray:
    theta = np.radians(angle_deg)
    return np.array([
        rho * np.cos(theta), rho * np.sin(theta), np.sqrt(params.shell_radius ** 2 - rho ** 2)])


def generate_specimen(seed: int, params: Optional[SpecimenParams] = None, with_scan: bool = True) -> DefectSpecimen:
    """시드와 파라미터로 결손 시편을 만듭니다.

    Args:
        seed (int): 난수 시드. 같은 시드와 파라미터는 같은 시편을 만듭니다.
        params (SpecimenParams, optional): 생성 파라미터
        with_scan (bool): 스캔 복사본까지 만들지 여부

    Returns:
        DefectSpecimen: 생성된 시편

    Raises:
        InvalidParamsError: 윤곽이 캡 안에 들어가지 않는 등 기하가 성립하지 않는 경우
    """
    params = params or SpecimenParams()
    rng = np.random.default_rng(seed)
    sectors = max(16, int(round(2.0 * np.pi * params.contour_base_radius / params.edge_length)))
    theta = 2.0 * np.pi * np.arange(sectors) / sectors
    contour = _contour_radius(params, theta, rng)
    _check_params(params, contour)

    rho, hole_ring, implant_ring = _ring_radii(params, contour)
    last_ring = len(rho)
    grid = _ShellGrid(rho, theta, params.shell_radius, params.shell_radius - params.shell_thickness)
    levels = max(1, int(round(params.shell_thickness / params.edge_length)))

    extra = []
    ct_faces = [grid.surface(0, last_ring), grid.surface(0, last_ring, inner=True),
                grid.wall(last_ring, levels, False, extra)]
    ct_model = grid.mesh(ct_faces, extra, FRAME_CT)

    extra = []
    skull_faces = [grid.surface(hole_ring, last_ring), grid.surface(hole_ring, last_ring, inner=True),
                   grid.wall(hole_ring, levels, True, extra), grid.wall(last_ring, levels, False, extra)]
    defect_skull = grid.mesh(skull_faces, extra, FRAME_CT)

    extra = []
    implant_faces = [grid.surface(0, implant_ring), grid.surface(0, implant_ring, inner=True),
                     grid.wall(implant_ring, levels, False, extra)]
    implant = grid.mesh(implant_faces, extra, FRAME_CT)

    fiducial_rho = 0.5 * (contour.max() + params.implant_margin + params.crop_radius)
    fiducials = LandmarkSet(
        [_surface_point(params, fiducial_rho, angle) for angle in SKULL_FIDUCIAL_ANGLES],
        ["F1", "F2", "F3"], FRAME_CT)
    implant_fiducials = LandmarkSet(
        [_surface_point(params, 0.5 * contour.min(), angle) for angle in IMPLANT_FIDUCIAL_ANGLES],
        ["M1", "M2", "M3"], FRAME_CT)

    specimen = DefectSpecimen(
        ct_model=ct_model,
        defect_skull=defect_skull,
        oversized_implant=implant,
        ground_truth_contour=grid.vertices[grid.ring(hole_ring)],
        fiducials=fiducials,
        implant_fiducials=implant_fiducials,
        seed=seed,
        params=params,
        contour_radius=contour,
    )
    if with_scan:
        extra = []
        scan_faces = [grid.surface(hole_ring, last_ring), grid.wall(hole_ring, levels, True, extra)]
        make_scan(specimen, rng, grid.mesh(scan_faces, extra, FRAME_CT))
    logger.info(
        "시편 생성: seed %d, 섹터 %d, 링 %d, 결손 정점 %d, 임플란트 정점 %d",
        seed, sectors, last_ring, defect_skull.n_vertices, implant.n_vertices)
    return specimen


def _scan_surface(specimen: DefectSpecimen) -> TriangleMesh:
    """결손 두개골에서 스캐너가 보는 면(바깥 표면과 구멍 벽)만 남깁니다."""
    skull = specimen.defect_skull
    inner_radius = specimen.params.shell_radius - specimen.params.shell_thickness
    radius = np.linalg.norm(skull.vertices, axis=1)
    horizontal = np.hypot(skull.vertices[:, 0], skull.vertices[:, 1])
    crop_wall = (horizontal > specimen.params.crop_radius - 1e-9) & (radius < specimen.params.shell_radius - 1e-9)
    inner_faces = np.isclose(radius[skull.faces], inner_radius, rtol=0.0, atol=1e-9).all(axis=1)
    visible = ~inner_faces & ~crop_wall[skull.faces].any(axis=1)
    return skull.face_subset(visible)


def make_scan(
        specimen: DefectSpecimen,
        rng: np.random.Generator,
        surface: Optional[TriangleMesh] = None) -> DefectSpecimen:
    """시편의 스캐너 좌표계 복사본을 만들어 specimen에 채웁니다.

    CT 좌표의 스캔 표면에 무작위 강체 변환(최대 max_rotation_deg, max_translation_mm)을
    적용하고 정점마다 noise_sigma 잡음을 더합니다. 스캔 랜드마크는 CT 기준점을 같은 변환으로
    옮긴 뒤 landmark_sigma 잡음을 더한 값입니다.
    """
    params = specimen.params
    surface = surface if surface is not None else _scan_surface(specimen)

    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = np.radians(params.max_rotation_deg) * rng.uniform(0.0, 1.0)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    shift = direction * params.max_translation_mm * rng.uniform(0.0, 1.0)
    ct_to_scan = RigidTransform(Rotation.from_rotvec(axis * angle).as_matrix(), shift, FRAME_CT, FRAME_SCAN)

    noise = rng.normal(scale=params.noise_sigma, size=surface.vertices.shape) if params.noise_sigma else 0.0
    specimen.scan = TriangleMesh(ct_to_scan.apply(surface.vertices + noise), surface.faces, frame=FRAME_SCAN)
    picked = ct_to_scan.apply(specimen.fiducials.points)
    if params.landmark_sigma:
        picked = picked + rng.normal(scale=params.landmark_sigma, size=picked.shape)
    specimen.scan_landmarks = LandmarkSet(picked, specimen.fiducials.labels, FRAME_SCAN)
    specimen.scan_to_ct = ct_to_scan.inverse()
    return specimen


def digitize_contour(
        specimen: DefectSpecimen,
        n_points: int = 24,
        sigma: float = 0.3,
        rng: Optional[np.random.Generator] = None) -> ContourPointCloud:
    """정답 윤곽에서 n_points개를 고르게 골라 잡음을 더한 CT 좌표 점군

    기구 끝으로 윤곽을 짚어 얻는 성긴 점군에 해당하며 같은 곡선 맞춤 경로에 넣을 수 있습니다.
    """
    if n_points < 3:
        raise InvalidParamsError(f"윤곽 점은 최소 3개여야 합니다. 입력: {n_points}")
    rng = rng or np.random.default_rng(specimen.seed)
    contour = specimen.ground_truth_contour
    picked = contour[np.linspace(0, len(contour), n_points, endpoint=False).astype(int)]
    normals = picked / np.linalg.norm(picked, axis=1)[:, None]
    points = picked + rng.normal(scale=sigma, size=picked.shape)
    return ContourPointCloud(points, FRAME_CT, normals)


def save_specimen(specimen: DefectSpecimen, directory: str, scan_format: str = "ply") -> dict[str, str]:
    """시편 파일 묶음을 directory에 저장하고 파일 이름별 경로를 반환합니다."""
    os.makedirs(directory, exist_ok=True)
    paths = {
        "ct_model": os.path.join(directory, "ct_model.ply"),
        "defect_skull": os.path.join(directory, "defect_skull.ply"),
        "implant": os.path.join(directory, "implant.ply"),
        "ct_landmarks": os.path.join(directory, "ct_landmarks.txt"),
        "implant_markers_ct": os.path.join(directory, "implant_markers_ct.txt"),
        "ground_truth_contour": os.path.join(directory, "ground_truth_contour.xyz"),
        "specimen": os.path.join(directory, "specimen.json"),
    }
    save_mesh(specimen.ct_model, paths["ct_model"])
    save_mesh(specimen.defect_skull, paths["defect_skull"])
    save_mesh(specimen.oversized_implant, paths["implant"])
    save_landmarks(specimen.fiducials, paths["ct_landmarks"])
    save_landmarks(specimen.implant_fiducials, paths["implant_markers_ct"])
    save_point_cloud(ContourPointCloud(specimen.ground_truth_contour, FRAME_CT), paths["ground_truth_contour"])
    if specimen.scan is not None:
        paths["scan"] = os.path.join(directory, f"scan.{'stl' if scan_format.startswith('stl') else 'ply'}")
        paths["scan_landmarks"] = os.path.join(directory, "scan_landmarks.txt")
        paths["scan_to_ct_truth"] = os.path.join(directory, "scan_to_ct_truth.txt")
        save_mesh(specimen.scan, paths["scan"], scan_format if scan_format in MESH_FORMATS else None)
        save_landmarks(specimen.scan_landmarks, paths["scan_landmarks"])
        save_transform(specimen.scan_to_ct, paths["scan_to_ct_truth"])

    summary = {
        "seed": specimen.seed,
        "params": specimen.params.model_dump(),
        "contour_radius_min": float(specimen.contour_radius.min()),
        "contour_radius_max": float(specimen.contour_radius.max()),
        "edge_length": specimen.defect_skull.mean_edge_length,
    }
    with open(paths["specimen"], "w", encoding="utf-8") as file:
        json.dump(summary, file, indent=2, sort_keys=True)
    return paths
