#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cpnc/kg.hpp"
#include "cpnc/matrix.hpp"

namespace cpnc {

// Node -> cluster map; centroids are the latent concept representations.
struct ClusterAssignment {
  std::vector<int32_t> assignment;
  Matrix centroids;  // K x d
  double inertia = 0.0;
  int32_t k = 0;
  std::vector<double> inertia_trace;
  int iterations = 0;

  std::vector<int64_t> size_histogram() const;
};

// Lloyd's algorithm with k-means++ seeding. Stops when the assignment is
// stable or the relative inertia improvement drops below tol. Empty clusters
// are reseeded to the point farthest from its assigned centroid.
ClusterAssignment kmeans(const Matrix& points, int32_t k, uint64_t seed,
                         int max_iter = 100, double tol = 1e-4);

// Centroid of the node's cluster: the exact mean of its members' rows.
std::span<const double> latent_concept(const ClusterAssignment& assign, int32_t node);

void save_clusters(const std::filesystem::path& assignments_tsv,
                   const std::filesystem::path& centroids_tsv, const Graph& g,
                   const ClusterAssignment& assign);
ClusterAssignment load_clusters(const std::filesystem::path& assignments_tsv,
                                const std::filesystem::path& centroids_tsv,
                                const Graph& g);

}  // namespace cpnc
