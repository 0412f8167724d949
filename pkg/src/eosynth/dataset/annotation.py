"""Farm bounding boxes and their PASCAL-VOC serialisation."""
from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from ..composer import SceneComposition
from ..texture import kernel_from_spec, point_pixels

LABEL = "windfarm"


@dataclass(frozen=True)
class Box:
    xmin: int
    ymin: int
    xmax: int
    ymax: int
    label: str = LABEL

    def contains(self, col: int, row: int) -> bool:
        return self.xmin <= col <= self.xmax and self.ymin <= row <= self.ymax


@dataclass(frozen=True)
class AnnotationDoc:
    filename: str
    width: int
    height: int
    depth: int = 1
    boxes: tuple[Box, ...] = field(default_factory=tuple)


def turbine_box(pixels: np.ndarray, radius: int, width: int, height: int, label: str = LABEL) -> Box:
    """Hull of (row, col) pixels dilated by ``radius``, clamped to the image."""
    rows, cols = pixels[:, 0], pixels[:, 1]
    return Box(
        max(0, int(cols.min()) - radius),
        max(0, int(rows.min()) - radius),
        min(width - 1, int(cols.max()) + radius),
        min(height - 1, int(rows.max()) + radius),
        label,
    )


def derive_annotation(c: SceneComposition) -> list[Box]:
    n = c.extent.image_size
    boxes = []
    for el in c.elements:
        if el.entity != "WindFarm" or not len(el.points):
            continue
        radius = kernel_from_spec(el.spec("WindTurbine")).radius
        px = point_pixels(el.points, c.extent.sensor_resolution, (n, n))
        boxes.append(turbine_box(px, radius, n, n))
    return boxes


def _text(parent: ET.Element, tag: str, value) -> ET.Element:
    e = ET.SubElement(parent, tag)
    e.text = str(value)
    return e


def export_annotation(doc: AnnotationDoc) -> str:
    root = ET.Element("annotation")
    _text(root, "folder", "images")
    _text(root, "filename", doc.filename)
    size = ET.SubElement(root, "size")
    _text(size, "width", doc.width)
    _text(size, "height", doc.height)
    _text(size, "depth", doc.depth)
    _text(root, "segmented", 0)
    for b in doc.boxes:
        obj = ET.SubElement(root, "object")
        _text(obj, "name", b.label)
        _text(obj, "pose", "Unspecified")
        _text(obj, "truncated", 0)
        _text(obj, "difficult", 0)
        bb = ET.SubElement(obj, "bndbox")
        for tag in ("xmin", "ymin", "xmax", "ymax"):
            _text(bb, tag, int(getattr(b, tag)))
    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="unicode") + "\n"


def parse_annotation(text: str) -> AnnotationDoc:
    root = ET.fromstring(text)
    if root.tag != "annotation":
        raise ValueError(f"expected <annotation>, found <{root.tag}>")
    size = root.find("size")
    boxes = []
    for obj in root.findall("object"):
        bb = obj.find("bndbox")
        coords = [int(float(bb.findtext(t))) for t in ("xmin", "ymin", "xmax", "ymax")]
        boxes.append(Box(*coords, label=obj.findtext("name", LABEL)))
    return AnnotationDoc(
        filename=root.findtext("filename", ""),
        width=int(size.findtext("width")),
        height=int(size.findtext("height")),
        depth=int(size.findtext("depth", "1")),
        boxes=tuple(boxes),
    )


def rescale_image(img: np.ndarray, target: int) -> np.ndarray:
    """Area-average downscale (ties round up) or nearest-neighbour upscale."""
    h, w = img.shape
    if h != w:
        raise ValueError("only square images are rescaled")
    if target == h:
        return img.copy()
    if target <= 0:
        raise ValueError("target size must be positive")
    if h % target == 0:
        f = h // target
        sums = img.astype(np.int64).reshape(target, f, target, f).sum(axis=(1, 3))
        n = f * f
        return ((2 * sums + n) // (2 * n)).astype(np.uint8)
    if target % h == 0:
        f = target // h
        return np.repeat(np.repeat(img, f, axis=0), f, axis=1)
    raise ValueError(f"cannot rescale {h} px to {target} px: sizes must divide each other")


def rescale_boxes(boxes, source: int, target: int) -> list[Box]:
    if not (source % target == 0 or target % source == 0):
        raise ValueError(f"cannot rescale {source} px to {target} px")
    out = []
    for b in boxes:
        out.append(Box(
            math.floor(b.xmin * target / source),
            math.floor(b.ymin * target / source),
            math.ceil(b.xmax * target / source),
            math.ceil(b.ymax * target / source),
            b.label,
        ))
    return out


def rescale_for_training(img: np.ndarray, target: int, boxes=()) -> tuple[np.ndarray, list[Box]]:
    return rescale_image(img, target), rescale_boxes(boxes, img.shape[0], target)
