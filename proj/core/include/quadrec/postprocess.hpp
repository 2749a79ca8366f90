#pragma once

#include "quadrec/mesh.hpp"

namespace quadrec {

struct PostprocessOptions {
  double angle_tol_deg = 25.0;  // "close to right angle" tolerance
  int max_passes = 10;
  bool skip_prune = false;
  bool skip_fill = false;
};

/// Face repair score from boundary-edge and non-manifold-edge counts:
/// (E_b + 1) * (10 * E_n + 1). 1 means a regular face; 2 a face with one
/// boundary edge; anything higher is a deletion candidate.
int face_score(int boundary_edges, int nonmanifold_edges);

/// Repeatedly removes the highest-scoring face among those touching a
/// non-manifold edge (ties: larger non-manifold count first, then smaller
/// face index), refreshing incidence and the scores of affected faces
/// after every removal. Purely boundary-heavy faces are never deleted, so
/// open sheets keep their rims. The result has no edge with incidence >= 3.
QuadMesh prune_nonmanifold(const QuadMesh& mesh);

/// Greedy boundary-loop hole filling in priority order: a 4-edge loop is
/// closed with one face; 3 consecutive boundary edges whose two interior
/// turns are within angle_tol of 90 degrees are bridged; 2 consecutive
/// edges with a near-right turn spawn a new vertex by parallelogram
/// completion. A fill is skipped if it would duplicate a face or raise any
/// edge to incidence 3. Requires a mesh without non-manifold edges.
QuadMesh fill_holes(const QuadMesh& mesh, const PostprocessOptions& options = {});

/// prune_nonmanifold then fill_holes, honoring the skip flags.
QuadMesh postprocess(const QuadMesh& mesh, const PostprocessOptions& options = {});

}  // namespace quadrec
