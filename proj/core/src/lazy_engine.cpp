#include <memory>

#include "prepbench/csv.hpp"
#include "prepbench/engines/columnar.hpp"
#include "prepbench/errors.hpp"
#include "prepbench/expr.hpp"
#include "prepbench/parquet.hpp"

namespace prepbench {

namespace {

using colstore::ColumnTable;

ColumnTable load_path(const std::string& path) {
  if (path.size() > 8 && path.compare(path.size() - 8, 8, ".parquet") == 0)
    return colstore::from_rows(read_parquet(path));
  return colstore::from_rows(read_csv(path));
}

/// Logical plan: a materialized base (possibly none, when the plan starts at
/// read) plus pending calls.
struct LazyState {
  std::shared_ptr<const ColumnTable> base;
  std::vector<PreparatorCall> plan;
  std::optional<std::vector<ColumnSpec>> schema;
};

class LazyAdapter final : public Adapter {
public:
  LazyAdapter() : desc_(lazy_descriptor()) {}

  const AdapterDescriptor& descriptor() const override { return desc_; }

  FrameHandle apply(const FrameHandle& in, const PreparatorCall& call) override {
    LazyState next;
    if (in.valid()) {
      const auto& s = state_of(in);
      next.base = s.base;
      next.plan = s.plan;
      next.schema = s.schema;
    } else if (call.op != Preparator::Read) {
      throw EngineError("lazy plan must start from a frame or a read step");
    }
    next.plan.push_back(call);
    if (next.schema)
      next.schema = colstore::infer_schema(*next.schema, call, context());
    else if (call.op == Preparator::Read)
      next.schema = std::nullopt;
    FrameHandle h;
    h.state = std::make_shared<const LazyState>(std::move(next));
    h.materialized = false;
    return h;
  }

  FrameHandle materialize(const FrameHandle& in) override {
    const auto& s = state_of(in);
    if (s.plan.empty()) {
      FrameHandle out = in;
      out.materialized = true;  // idempotent
      return out;
    }
    try {
      ColumnTable work;
      if (s.base) work = *s.base;  // one upfront copy; steps then run in place
      const auto ctx = context();
      for (std::size_t i = 0; i < s.plan.size(); ++i) {
        // Fuse runs of filters into one scan.
        if (s.plan[i].op == Preparator::Query && i + 1 < s.plan.size() &&
            s.plan[i + 1].op == Preparator::Query) {
          std::vector<expr::Compiled> preds;
          while (i < s.plan.size() && s.plan[i].op == Preparator::Query) {
            preds.emplace_back(s.plan[i].args["expr"].get<std::string>(), work.schema());
            ++i;
          }
          --i;
          std::vector<std::uint32_t> idx;
          for (std::size_t r = 0; r < work.n_rows; ++r) {
            const auto row = work.scratch_row(r);
            bool all = true;
            for (const auto& p : preds)
              if (!p.matches(row)) {
                all = false;
                break;
              }
            if (all) idx.push_back(static_cast<std::uint32_t>(r));
          }
          work = colstore::gather(work, idx);
          continue;
        }
        work = colstore::apply_op_owned(std::move(work), s.plan[i], ctx);
      }
      LazyState done;
      done.schema = work.schema();
      done.base = std::make_shared<const ColumnTable>(std::move(work));
      FrameHandle h;
      h.state = std::make_shared<const LazyState>(std::move(done));
      h.materialized = true;
      return h;
    } catch (const Error&) {
      throw;
    } catch (const std::bad_alloc&) {
      throw EngineError("allocation failure", /*oom=*/true);
    } catch (const std::exception& e) {
      throw EngineError(e.what());
    }
  }

  Table to_canonical(const FrameHandle& in) override {
    return colstore::to_rows(require_materialized(in));
  }

  std::optional<std::vector<ColumnSpec>> schema(const FrameHandle& in) override {
    return state_of(in).schema;
  }

  std::size_t row_count(const FrameHandle& in) override {
    return require_materialized(in).n_rows;
  }

  FrameHandle from_table(const Table& table) override {
    LazyState s;
    s.base = std::make_shared<const ColumnTable>(colstore::from_rows(table));
    s.schema = s.base->schema();
    FrameHandle h;
    h.state = std::make_shared<const LazyState>(std::move(s));
    h.materialized = true;
    return h;
  }

  void register_table(const std::string& name, const FrameHandle& handle) override {
    session_[name] = handle;
  }

  std::optional<FrameHandle> lookup_table(const std::string& name) override {
    const auto it = session_.find(name);
    if (it == session_.end()) return std::nullopt;
    return it->second;
  }

  std::pair<double, double> column_quantiles(const FrameHandle& in, const std::string& column,
                                             double lower_q, double upper_q) override {
    const auto& t = require_materialized(in);
    const auto& col = t.columns[t.column_index(column)];
    return {colstore::column_quantile(col, lower_q, colstore::QuantileMethod::NearestRank),
            colstore::column_quantile(col, upper_q, colstore::QuantileMethod::NearestRank)};
  }

  void reset_session() override { session_.clear(); }

private:
  colstore::OpContext context() {
    colstore::OpContext ctx;
    ctx.quantiles = colstore::QuantileMethod::NearestRank;
    ctx.resolve_table = [this](const std::string& name) -> ColumnTable {
      if (auto h = lookup_table(name)) {
        const FrameHandle m = materialize(*h);
        return *state_of(m).base;
      }
      return load_path(name);
    };
    return ctx;
  }

  const LazyState& state_of(const FrameHandle& h) {
    if (!h.valid()) throw EngineError("invalid frame handle");
    return *static_cast<const LazyState*>(h.state.get());
  }

  const ColumnTable& require_materialized(const FrameHandle& h) {
    const auto& s = state_of(h);
    if (!h.materialized || !s.plan.empty() || !s.base)
      throw EngineError("handle has pending lazy computation; call materialize first");
    return *s.base;
  }

  AdapterDescriptor desc_;
  std::map<std::string, FrameHandle> session_;
};

}  // namespace

AdapterDescriptor lazy_descriptor() {
  AdapterDescriptor d;
  d.engine = {"lazycol", "lazy", "cpu"};
  std::map<Preparator, CompatibilityLevel> m;
  for (const Preparator p : all_preparators()) m[p] = CompatibilityLevel::FullMatch;
  d.supports = std::move(m);
  d.version = "0.1";
  d.approximate_quantiles = true;  // nearest-rank, no interpolation
  return d;
}

std::unique_ptr<Adapter> make_lazy_adapter() { return std::make_unique<LazyAdapter>(); }

}  // namespace prepbench
