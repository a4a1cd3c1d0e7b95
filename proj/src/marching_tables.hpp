#pragma once

namespace dforge::mc {

// Corner layout: bit i of a cell case corresponds to corner i being inside
// (tsdf < 0). Corners 0..3 are the z = 0 face counter-clockwise starting at
// (0,0,0); corners 4..7 the z = 1 face above them. Edge e connects
// kEdgeCorners[e][0] to kEdgeCorners[e][1].
extern const int kEdgeCorners[12][2];

// Classic 256-case triangle table; each row lists edge indices in triples,
// -1 terminated, at most 5 triangles per cell.
extern const signed char kTriTable[256][16];

} // namespace dforge::mc
