#pragma once

#include <memory>
#include <set>

#include "prepbench/adapter.hpp"
#include "prepbench/errors.hpp"

namespace prepbench::testing {

/// Forwards everything to an inner adapter, counting materialize calls and
/// optionally failing configured preparators.
class InstrumentedAdapter final : public Adapter {
public:
  explicit InstrumentedAdapter(std::unique_ptr<Adapter> inner, std::string name_suffix = "-probe")
      : inner_(std::move(inner)), desc_(inner_->descriptor()) {
    desc_.engine.name += name_suffix;
  }

  int materialize_calls = 0;
  int apply_calls = 0;
  std::set<Preparator> unsupported;           // throws UnsupportedOperation
  std::set<Preparator> oom_on;                // throws EngineError(oom)
  std::set<Preparator> error_on;              // throws EngineError

  const AdapterDescriptor& descriptor() const override { return desc_; }

  FrameHandle apply(const FrameHandle& in, const PreparatorCall& call) override {
    ++apply_calls;
    if (unsupported.count(call.op))
      throw UnsupportedOperation(std::string(to_string(call.op)) + " is not available");
    if (oom_on.count(call.op)) throw EngineError("synthetic allocation failure", true);
    if (error_on.count(call.op)) throw EngineError("synthetic failure");
    return inner_->apply(in, call);
  }

  FrameHandle materialize(const FrameHandle& in) override {
    ++materialize_calls;
    return inner_->materialize(in);
  }

  Table to_canonical(const FrameHandle& in) override { return inner_->to_canonical(in); }
  std::optional<std::vector<ColumnSpec>> schema(const FrameHandle& in) override {
    return inner_->schema(in);
  }
  std::size_t row_count(const FrameHandle& in) override { return inner_->row_count(in); }
  FrameHandle from_table(const Table& table) override { return inner_->from_table(table); }
  void register_table(const std::string& name, const FrameHandle& handle) override {
    inner_->register_table(name, handle);
  }
  std::optional<FrameHandle> lookup_table(const std::string& name) override {
    return inner_->lookup_table(name);
  }
  std::pair<double, double> column_quantiles(const FrameHandle& in, const std::string& column,
                                             double lower_q, double upper_q) override {
    return inner_->column_quantiles(in, column, lower_q, upper_q);
  }
  void reset_session() override { inner_->reset_session(); }

  AdapterDescriptor& mutable_descriptor() { return desc_; }

private:
  std::unique_ptr<Adapter> inner_;
  AdapterDescriptor desc_;
};

/// Fresh scratch directory under the system temp root.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace prepbench::testing
