"""Binary Netpbm (P5 gray, P6 colour) readers and writers, maxval 255 only."""

import numpy as np

from .imaging import ImageBuffer


class NetpbmError(ValueError):
    pass


class BadMagic(NetpbmError):
    pass


class BadMaxval(NetpbmError):
    pass


class BadHeader(NetpbmError):
    pass


class Truncated(NetpbmError):
    pass


_WHITESPACE = b" \t\n\v\f\r"


def _header_fields(data, count):
    """Read ``count`` ASCII integers after the magic.

    Whitespace separates fields and '#' starts a comment running to the end
    of the line. Returns the fields and the offset of the raster, which
    starts after the single whitespace byte that ends the last field.
    """
    pos, fields = 2, []
    n = len(data)
    while len(fields) < count:
        while pos < n and (data[pos] in _WHITESPACE or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        token = data[start:pos]
        if not token:
            raise Truncated("header ends before all fields were read")
        if not token.isdigit():
            raise BadHeader(f"expected an unsigned integer in the header, got {token!r}")
        fields.append(int(token))
    if pos >= n:
        raise Truncated("no raster after the header")
    if data[pos] not in _WHITESPACE:
        raise BadHeader("header must end with one whitespace byte")
    return fields, pos + 1


def _read(data, magic, channels):
    data = bytes(data)
    if data[:2] != magic:
        raise BadMagic(f"expected magic {magic!r}, got {data[:2]!r}")
    (width, height, maxval), offset = _header_fields(data, 3)
    if maxval != 255:
        raise BadMaxval(f"only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise BadHeader(f"image size must be positive, got {width}x{height}")
    size = width * height * channels
    raster = data[offset:offset + size]
    if len(raster) < size:
        raise Truncated(f"raster has {len(raster)} of {size} bytes")
    return ImageBuffer.from_bytes(width, height, channels, raster)


def read_ppm(data):
    return _read(data, b"P6", 3)


def read_pgm(data):
    return _read(data, b"P5", 1)


def _write(image, magic, channels):
    if image.channels != channels:
        raise ValueError(f"{magic.decode()} needs a {channels}-channel image, got {image.channels}")
    header = b"%s\n%d %d\n255\n" % (magic, image.width, image.height)
    return header + image.tobytes()


def write_ppm(image):
    return _write(image, b"P6", 3)


def write_pgm(image):
    return _write(image, b"P5", 1)


def read_image(data):
    """Decode either format by its magic."""
    if bytes(data[:2]) == b"P5":
        return read_pgm(data)
    return read_ppm(data)


def load(path):
    with open(path, "rb") as fh:
        return read_image(fh.read())


def save(path, image):
    blob = write_pgm(image) if image.channels == 1 else write_ppm(image)
    with open(path, "wb") as fh:
        fh.write(blob)


def random_image(rng, max_side=32, channels=None):
    """Random raster for round-trip checks."""
    w, h = (int(v) for v in rng.integers(1, max_side + 1, size=2))
    c = channels or int(rng.choice([1, 3]))
    shape = (h, w) if c == 1 else (h, w, 3)
    return ImageBuffer(rng.integers(0, 256, size=shape, dtype=np.uint8))
