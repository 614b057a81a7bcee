#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "vdpg/bench.hpp"
#include "vdpg/nonlinear.hpp"

namespace vdpg {

enum class Strategy { energy, adhoc1, adhoc2 };
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct AdaptConfig {
  Strategy strategy = Strategy::energy;
  double theta = 0.2;
  int max_refinements = 30;
  long dof_budget = 400000;     // stop after the first mesh with at least this many DoFs
  double cylinder_band = 0.1;   // adhoc2
  double penalty_T12 = 0;       // weight of the T12 = 0 penalty on y = 0 (0: off)
  PolyOrders orders;
  void validate() const;
};

std::set<int> mark_energy(const ErrorIndicators& ind, const std::vector<int>& active, double theta);
std::set<int> mark_adhoc1(const ErrorIndicators& ind, const std::vector<int>& active, double theta, const Mesh& mesh);
std::set<int> mark_adhoc2(const ErrorIndicators& ind, const std::vector<int>& active, double theta, const Mesh& mesh,
                          double band);

struct RefinementRecord {
  int ref = 0;
  std::size_t dof = 0, elements = 0;
  DragEstimates drag;
  double energy_err = 0;
  int newton_iters = 0;
  RateVerdict quadratic = RateVerdict::indeterminate;
  NewtonReport newton;
  double max_T12_reflective = 0;
  double seconds = 0;
};

struct AdaptResult {
  std::vector<RefinementRecord> records;
  Mesh mesh;              // last solved mesh
  DofMap dofmap;
  NewtonResult last;      // state on the last solved mesh
  bool failed = false;    // stopped on a solver failure or divergence
  std::string failure;
};

using RecordCallback =
    std::function<void(const RefinementRecord&, const Mesh&, const DofMap&, const NewtonResult&)>;

// {gauss_newton -> indicators -> drag -> record -> mark -> refine} from the zero state,
// warm-starting each mesh with the prolonged fields of the previous one.
AdaptResult adapt_loop(const AdaptConfig& cfg, const ModelParams& m, const Mesh& mesh0,
                       const NewtonOptions& newton = {}, const RecordCallback& on_record = {});

}  // namespace vdpg
