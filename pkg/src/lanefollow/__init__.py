"""Camera lane detection and differential-drive lane following.

Frames go through grayscale/HSV preprocessing, Gaussian blur, Canny edges and
a Hough transform; the strongest left and right lines give a lane, its
vanishing point, a region of interest and a steering angle, which a simple
inner/outer wheel law turns into motor duties. A synthetic road camera and
kinematic car close the loop without hardware.
"""

from .codecs import read_pgm, read_ppm, write_pgm, write_ppm
from .control import ControlConfig, MotorCommand, angle_to_command
from .edges import canny, sobel
from .hough import PolarLine, Segment, extract_peaks, hough_transform
from .imaging import ImageBuffer, gaussian_blur, rgb_to_hsv, to_grayscale
from .lane import LaneConfig, LaneEstimate, Status, detect_lane
from .sim import CameraSpec, RoadSpec, SimParams, VehicleState, render_frame, run_closed_loop

__version__ = "0.1.0"
