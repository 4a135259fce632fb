#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prepbench/reference_engine.hpp"
#include "prepbench/table.hpp"
#include "prepbench/taxonomy.hpp"

namespace prepbench {

struct EngineId {
  std::string name;
  std::string evaluation = "eager";   // eager | lazy
  std::string accelerator = "cpu";    // cpu | gpu
  bool operator==(const EngineId&) const = default;
};

/// Adapter self-description: engine identity, per-preparator compatibility,
/// and the executor-facing policy knobs.
struct AdapterDescriptor {
  EngineId engine;
  std::map<Preparator, CompatibilityLevel> supports;  // must cover all 27
  std::string version = "0.1";
  /// Quantiles are computed by an inexact method; outlier equivalence is
  /// checked on the thresholds with the relaxed 1e-2 relative tolerance.
  bool approximate_quantiles = false;
  /// Executor resets the session between measured runs (fresh context)
  /// unless warm caches are intrinsic to the engine.
  bool reset_between_runs = true;
};

/// Opaque reference to an engine-resident table. Value-semantic: applying a
/// preparator never mutates an existing handle's logical content.
struct FrameHandle {
  std::shared_ptr<const void> state;
  bool materialized = false;

  bool valid() const { return state != nullptr; }
};

/// The backend-adapter contract: every engine exposes the 27 preparators, a
/// materialization hook, and canonical export. A single FrameHandle must not
/// be used from two threads at once; distinct handles may.
class Adapter {
public:
  virtual ~Adapter() = default;

  virtual const AdapterDescriptor& descriptor() const = 0;

  /// Applies one validated call. For `read` the input handle may be empty.
  /// Lazy engines may return an unmaterialized handle. Throws
  /// UnsupportedOperation when the descriptor declares the call unrunnable,
  /// EngineError on wrapped failures.
  virtual FrameHandle apply(const FrameHandle& in, const PreparatorCall& call) = 0;

  /// Forces all pending computation. Idempotent.
  virtual FrameHandle materialize(const FrameHandle& in) = 0;

  /// Engine-neutral export; requires a materialized handle.
  virtual Table to_canonical(const FrameHandle& in) = 0;

  /// Schema without forcing execution, when the engine can derive it (lazy
  /// plans with data-dependent columns return nullopt).
  virtual std::optional<std::vector<ColumnSpec>> schema(const FrameHandle& in) = 0;

  /// Row count of a materialized handle.
  virtual std::size_t row_count(const FrameHandle& in) = 0;

  /// Imports a canonical table into the engine.
  virtual FrameHandle from_table(const Table& table) = 0;

  /// Session table registry: join steps resolve `other` here first, then
  /// fall back to reading it as a dataset path.
  virtual void register_table(const std::string& name, const FrameHandle& handle) = 0;
  virtual std::optional<FrameHandle> lookup_table(const std::string& name) = 0;

  /// The engine's own quantile values for a column (the outlier thresholds
  /// validation hook).
  virtual std::pair<double, double> column_quantiles(const FrameHandle& in,
                                                     const std::string& column, double lower_q,
                                                     double upper_q) = 0;

  /// Clears session state (named tables, caches).
  virtual void reset_session() = 0;

  /// Worker/thread setting delivered by the orchestrator (Table 4 row).
  virtual void configure_workers(int workers) { workers_ = workers; }
  int workers() const { return workers_; }

protected:
  int workers_ = 1;
};

using AdapterFactory = std::function<std::unique_ptr<Adapter>()>;

/// Process-wide adapter registry. Adapters register a factory once under
/// their engine name; `get` returns the registry's shared instance.
class AdapterRegistry {
public:
  static AdapterRegistry& instance();

  void register_adapter(const AdapterDescriptor& descriptor, AdapterFactory factory);
  bool has(const std::string& name) const;
  Adapter& get(const std::string& name);  // UnknownEngine when absent
  std::unique_ptr<Adapter> make(const std::string& name) const;
  const AdapterDescriptor& descriptor(const std::string& name) const;
  std::vector<std::string> names() const;

  CompatibilityLevel compatibility(const std::string& engine, Preparator p) const;

  /// Engines declared but optional (GPU plug-ins): reported as SKIPPED when
  /// absent, never as failures.
  std::vector<std::string> declared_optional() const { return {"gpu-columnar"}; }

  void clear();  // test support

private:
  struct Entry {
    AdapterDescriptor descriptor;
    AdapterFactory factory;
    std::unique_ptr<Adapter> shared;
  };
  std::map<std::string, Entry> entries_;
};

/// Registers the in-tree engines (reference, columnar, lazycol). Idempotent.
void register_builtin_adapters();

/// Names of the engines a default validation run exercises.
std::vector<std::string> builtin_engine_names();

/// The spec-level comparison of one preparator's output across engines.
struct EquivalenceCheck {
  Preparator op = Preparator::Read;
  bool passed = false;
  std::string detail;
};

/// Runs every preparator with representative arguments on the standard
/// fixture and compares the adapter's canonical output against the reference
/// engine (exact order for sort, row-multiset otherwise, 1e-9 relative;
/// outlier thresholds at 1e-2 for approximate-quantile engines).
std::vector<EquivalenceCheck> run_equivalence_suite(Adapter& adapter, std::int64_t fixture_rows,
                                                    const std::filesystem::path& scratch_dir);

/// The standard validation fixture (deterministic; shared by the suite and
/// the acceptance tests).
Table standard_fixture(std::int64_t rows);

/// Representative arguments for each preparator over the standard fixture.
std::vector<PreparatorCall> standard_validation_calls();

}  // namespace prepbench
