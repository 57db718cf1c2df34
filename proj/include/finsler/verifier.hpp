#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "finsler/finsler_metric.hpp"
#include "finsler/volume.hpp"

namespace finsler {

struct GridSizes {
  int recovery_pts = 10;  // recovery grid is recovery_pts x recovery_pts
  int recovery_dirs = 8;
  int seam_ring = 64;
  int boundary_pairs = 24;
  int rotation_samples = 100;
  int convexity_pts = 12;  // convexity grid is pts x pts x dirs
  int convexity_dirs = 8;
  int injectivity_samples = 2000;
  int conjugate_ics = 50;
  double conjugate_horizon = 3.0;
  int conjugate_steps = 60;
  int geodesy_segments = 20;
  int ellipse_n = 256;
  int volume_radial = 48;
  int curvature_grid = 32;
  int table_radii = 64;
};

struct VerificationConfig {
  double R = 0.5;
  std::vector<double> lambdas = {0.0, 0.02, 0.05, 0.1};
  int quad_nodes = 256;
  int bd_samples = 192;
  int eigen_grid = 4096;
  GridSizes grids;
  ToleranceConfig tol;
  std::uint64_t seed = 42;
  std::string output_dir = "out";
  std::string cache_dir = ".finsler-cache";
  bool write_artifacts = true;

  // flat key=value file with '#' comments; unknown keys are an error
  void apply_file(const std::string& path);
  void apply_kv(const std::string& key, const std::string& value);
};

struct TestResult {
  std::string name;
  double lambda = 0.0;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  double ms = 0.0;
  std::map<std::string, double> notes;  // extra measured values, deterministic order
};

struct VerificationReport {
  double R = 0.0;
  std::vector<double> lambdas;
  double eigenvalue_a = 0.0;
  double delta0 = 0.0;
  double R0 = 0.0;
  double r0 = 0.0;
  bool eigen_cache_hit = false;
  std::vector<TestResult> tests;
  bool pass = false;

  std::string to_json(bool with_timing = true) const;
};

// loads the eigenfunction table from the cache if present and valid,
// otherwise solves and stores it
std::shared_ptr<const RadialEigenfunction> cache_eigenfunction(const VerificationConfig& cfg,
                                                               bool* cache_hit = nullptr);

VerificationReport run_suite(const VerificationConfig& cfg);

// formatting helper shared by the CSV emitters: shortest round-trip decimal
std::string fmt17(double v);

}  // namespace finsler
