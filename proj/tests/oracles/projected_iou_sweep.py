"""Projected 2D IoU of a car and a copy displaced 2 m, as depth grows.

Independent of the C++ code: corners come from an explicit R_y matrix and the
projection is a plain 3x4 matrix product. Prints the golden vector frozen in
tests/support/golden.hpp.
"""
import numpy as np

P = np.array([[700.0, 0.0, 600.0, 0.0],
              [0.0, 700.0, 180.0, 0.0],
              [0.0, 0.0, 1.0, 0.0]])
IMAGE_W, IMAGE_H = 1242, 375
H, W, L = 1.52, 1.63, 3.88
RY = 0.0
Y = 1.65


def corners(x, y, z):
    xs = np.array([1, 1, -1, -1]) * L / 2
    zs = np.array([1, -1, -1, 1]) * W / 2
    local = np.stack([np.tile(xs, 2), np.r_[np.zeros(4), -H * np.ones(4)], np.tile(zs, 2)])
    c, s = np.cos(RY), np.sin(RY)
    rot = np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    return rot @ local + np.array([[x], [y], [z]])


def hull(x, z):
    pts = P @ np.vstack([corners(x, Y, z), np.ones(8)])
    u, v = pts[0] / pts[2], pts[1] / pts[2]
    box = [u.min(), v.min(), u.max(), v.max()]
    return [np.clip(box[0], 0, IMAGE_W), np.clip(box[1], 0, IMAGE_H),
            np.clip(box[2], 0, IMAGE_W), np.clip(box[3], 0, IMAGE_H)]


def iou(a, b):
    iw = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    ih = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = iw * ih
    area = lambda r: (r[2] - r[0]) * (r[3] - r[1])
    return inter / (area(a) + area(b) - inter)


if __name__ == "__main__":
    print("# copy 2 m further along the optical axis")
    for z in range(10, 80, 10):
        print(f"{z} {iou(hull(0.0, z), hull(0.0, z + 2.0)):.17g}")
    print("# copy 2 m to the right at the same depth")
    for z in range(10, 80, 10):
        print(f"{z} {iou(hull(0.0, z), hull(2.0, z)):.17g}")
