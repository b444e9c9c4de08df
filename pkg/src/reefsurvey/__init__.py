"""reefsurvey: AUV benthic survey products to rugosity and hotspot maps.

The toolkit ingests a reconstructed reef mesh (PLY/OBJ), a camera pose
trajectory, and per-frame fish detections; produces per-cell rugosity grids,
pose-localized fish abundance maps with peak extraction, and detector quality
metrics; plans lawnmower coverage surveys; and ships a synthetic-reef
simulator that exercises the whole pipeline against planted ground truth.
"""

__version__ = "0.1.0"
