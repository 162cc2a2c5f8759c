"""Lossless video codec: bijective tokenization, masked group-wise entropy
modeling, and exact range coding over YUV420 planes."""

from .codec import (
    BitstreamHeader,
    EncoderConfig,
    RateReport,
    decode_patch,
    decode_video,
    encode_patch,
    encode_video,
    rate_report,
)
from .errors import CodecError
from .frame_io import FramePlane, FrameYUV420, VideoHeader, read_y4m, write_y4m

__version__ = "0.1.0"

__all__ = [
    "BitstreamHeader",
    "CodecError",
    "EncoderConfig",
    "FramePlane",
    "FrameYUV420",
    "RateReport",
    "VideoHeader",
    "decode_patch",
    "decode_video",
    "encode_patch",
    "encode_video",
    "rate_report",
    "read_y4m",
    "write_y4m",
    "__version__",
]
