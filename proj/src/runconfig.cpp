#include "pacc/runconfig.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pacc/errors.hpp"

namespace pacc {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

// Object wrapper that records key access so leftovers can be reported as
// unknown keys (typo protection).
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be a JSON object");
  }

  const std::string& path() const { return path_; }
  std::string sub(const std::string& key) const { return path_ + "." + key; }

  const json& at(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(sub(key) + " is required");
    used_.insert(key);
    return *it;
  }

  const json* get(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown key " + sub(it.key()));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double to_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + " must be a number");
  return j.get<double>();
}

int to_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + " must be an integer");
  return j.get<int>();
}

std::uint64_t to_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer()) {
    throw ConfigError(path + " must be a nonnegative integer");
  }
  auto v = j.get<long long>();
  if (v < 0) throw ConfigError(path + " must be a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

bool to_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + " must be a boolean");
  return j.get<bool>();
}

std::string to_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + " must be a string");
  return j.get<std::string>();
}

std::vector<double> to_double_vec(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(to_double(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::size_t> to_size_vec(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + " must be an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto v = to_int(j[i], path + "[" + std::to_string(i) + "]");
    if (v < 0) throw ConfigError(path + "[" + std::to_string(i) + "] must be >= 0");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::string> to_string_vec(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + " must be an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(to_string(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename T>
T pick(const json& j, const std::string& path,
       std::initializer_list<std::pair<const char*, T>> table) {
  std::string name = to_string(j, path);
  for (const auto& [key, value] : table) {
    if (name == key) return value;
  }
  std::string options;
  for (const auto& [key, value] : table) {
    (void)value;
    options += options.empty() ? key : std::string(" | ") + key;
  }
  throw ConfigError(path + " must be one of: " + options + ", got '" + name + "'");
}

LossSpec parse_loss(const json& j, const std::string& path) {
  Block b(j, path);
  LossSpec spec;
  spec.kind = loss_kind_from_name(to_string(b.at("loss"), b.sub("loss")));
  if (const json* v = b.get("bound")) spec.metadata.bound = to_double(*v, b.sub("bound"));
  if (const json* v = b.get("lipschitz")) {
    spec.metadata.lipschitz = to_double(*v, b.sub("lipschitz"));
  }
  if (const json* v = b.get("clamp")) spec.clamp = to_bool(*v, b.sub("clamp"));
  b.finish();
  spec.validate();
  return spec;
}

EpsilonPrior parse_prior(const json& j, const std::string& path) {
  Block b(j, path);
  EpsilonPrior prior;
  const json* fixed = b.get("fixed");
  const json* beta = b.get("beta");
  if ((fixed != nullptr) == (beta != nullptr)) {
    throw ConfigError(path + " needs exactly one of 'fixed' or 'beta'");
  }
  if (fixed) {
    prior.kind = EpsilonPrior::Kind::Fixed;
    prior.value = to_double(*fixed, b.sub("fixed"));
  } else {
    prior.kind = EpsilonPrior::Kind::ScaledBeta;
    Block inner(*beta, b.sub("beta"));
    prior.a = to_double(inner.at("a"), inner.sub("a"));
    prior.b = to_double(inner.at("b"), inner.sub("b"));
    prior.scale = to_double(inner.at("scale"), inner.sub("scale"));
    inner.finish();
  }
  b.finish();
  prior.validate();
  return prior;
}

StepSize parse_step(const json& j, const std::string& path) {
  Block b(j, path);
  StepSize step;
  const json* ratio = b.get("ratio");
  const json* absolute = b.get("absolute");
  if ((ratio != nullptr) == (absolute != nullptr)) {
    throw ConfigError(path + " needs exactly one of 'ratio' or 'absolute'");
  }
  if (ratio) {
    step.kind = StepSize::Kind::RatioOfEpsilon;
    step.value = to_double(*ratio, b.sub("ratio"));
  } else {
    step.kind = StepSize::Kind::Absolute;
    step.value = to_double(*absolute, b.sub("absolute"));
  }
  b.finish();
  return step;
}

DatasetSchema parse_schema(const json& j, const std::string& path) {
  Block b(j, path);
  DatasetSchema schema;
  const json& cols = b.at("columns");
  if (!cols.is_array()) throw ConfigError(b.sub("columns") + " must be an array");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::string cpath = b.sub("columns") + "[" + std::to_string(i) + "]";
    Block cb(cols[i], cpath);
    ColumnDesc col;
    col.name = to_string(cb.at("name"), cb.sub("name"));
    col.type = pick<ColumnType>(cb.at("type"), cb.sub("type"),
                                {{"categorical", ColumnType::Categorical},
                                 {"numeric", ColumnType::Numeric}});
    if (const json* v = cb.get("role")) {
      col.role = pick<ColumnRole>(*v, cb.sub("role"),
                                  {{"feature", ColumnRole::Feature},
                                   {"label", ColumnRole::Label},
                                   {"protected", ColumnRole::Protected},
                                   {"dropped", ColumnRole::Dropped}});
    }
    if (const json* v = cb.get("levels")) col.levels = to_string_vec(*v, cb.sub("levels"));
    cb.finish();
    schema.columns.push_back(std::move(col));
  }
  if (const json* trs = b.get("transforms")) {
    if (!trs->is_array()) throw ConfigError(b.sub("transforms") + " must be an array");
    for (std::size_t i = 0; i < trs->size(); ++i) {
      std::string tpath = b.sub("transforms") + "[" + std::to_string(i) + "]";
      Block tb((*trs)[i], tpath);
      Transform t;
      t.op = pick<Transform::Op>(tb.at("op"), tb.sub("op"),
                                 {{"drop", Transform::Op::Drop},
                                  {"group_levels", Transform::Op::GroupLevels},
                                  {"bin_quantiles", Transform::Op::BinQuantiles},
                                  {"bin_threshold", Transform::Op::BinThreshold}});
      t.column = to_string(tb.at("column"), tb.sub("column"));
      switch (t.op) {
        case Transform::Op::Drop:
          break;
        case Transform::Op::GroupLevels:
          t.to = to_string(tb.at("to"), tb.sub("to"));
          if (const json* v = tb.get("levels")) t.levels = to_string_vec(*v, tb.sub("levels"));
          if (const json* v = tb.get("others")) t.others = to_bool(*v, tb.sub("others"));
          if (const json* v = tb.get("except")) t.except = to_string_vec(*v, tb.sub("except"));
          break;
        case Transform::Op::BinQuantiles:
          t.bins = to_int(tb.at("bins"), tb.sub("bins"));
          break;
        case Transform::Op::BinThreshold:
          t.edges = to_double_vec(tb.at("edges"), tb.sub("edges"));
          break;
      }
      tb.finish();
      schema.transforms.push_back(std::move(t));
    }
  }
  if (const json* v = b.get("missing")) {
    schema.missing = pick<DatasetSchema::Missing>(
        *v, b.sub("missing"),
        {{"drop_row", DatasetSchema::Missing::DropRow},
         {"error", DatasetSchema::Missing::Error}});
  }
  if (const json* v = b.get("missing_tokens")) {
    schema.missing_tokens = to_string_vec(*v, b.sub("missing_tokens"));
  }
  b.finish();
  schema.validate();
  return schema;
}

ModelSpec parse_model(const json& j, const std::string& path) {
  Block b(j, path);
  ModelSpec spec;
  spec.kind = pick<ModelKind>(b.at("kind"), b.sub("kind"),
                              {{"linear", ModelKind::Linear}, {"mlp", ModelKind::Mlp}});
  if (const json* v = b.get("hidden")) spec.hidden = to_size_vec(*v, b.sub("hidden"));
  if (const json* v = b.get("input_dim")) {
    spec.input_dim = static_cast<std::size_t>(to_int(*v, b.sub("input_dim")));
  }
  if (const json* v = b.get("output_dim")) {
    spec.output_dim = static_cast<std::size_t>(to_int(*v, b.sub("output_dim")));
  } else {
    spec.output_dim = 0;  // inferred from the label levels
  }
  if (const json* v = b.get("activation")) {
    spec.activation = pick<Activation>(*v, b.sub("activation"),
                                       {{"sigmoid", Activation::Sigmoid},
                                        {"relu", Activation::Relu}});
  }
  if (const json* v = b.get("output")) {
    spec.output_map = pick<OutputMap>(*v, b.sub("output"),
                                      {{"softmax", OutputMap::Softmax},
                                       {"identity", OutputMap::Identity}});
  }
  b.finish();
  return spec;
}

ConstraintConf parse_constraint(const json& j, const std::string& path) {
  Block b(j, path);
  ConstraintConf conf;
  conf.id = to_string(b.at("id"), b.sub("id"));
  conf.kind = pick<ConstraintKind>(b.at("kind"), b.sub("kind"),
                                   {{"average", ConstraintKind::Average},
                                    {"pointwise", ConstraintKind::Pointwise}});
  conf.loss = parse_loss(b.at("loss"), b.sub("loss"));
  conf.threshold = to_double(b.at("threshold"), b.sub("threshold"));
  if (const json* src = b.get("source")) {
    Block sb(*src, b.sub("source"));
    conf.source = pick<SampleSource::Kind>(
        sb.at("kind"), sb.sub("kind"),
        {{"raw", SampleSource::Kind::Raw},
         {"counterfactual", SampleSource::Kind::Counterfactual},
         {"adversarial", SampleSource::Kind::Adversarial}});
    switch (conf.source) {
      case SampleSource::Kind::Raw:
        break;
      case SampleSource::Kind::Counterfactual:
        conf.column = to_string(sb.at("column"), sb.sub("column"));
        if (const json* v = sb.get("rule")) {
          conf.rule = pick<CounterfactualMap::Rule>(
              *v, sb.sub("rule"),
              {{"binary_swap", CounterfactualMap::Rule::BinarySwap},
               {"one_hot_permute", CounterfactualMap::Rule::OneHotPermute}});
        }
        if (const json* v = sb.get("permutation")) {
          conf.permutation = to_size_vec(*v, sb.sub("permutation"));
        }
        if (const json* v = sb.get("strict")) conf.strict = to_bool(*v, sb.sub("strict"));
        break;
      case SampleSource::Kind::Adversarial:
        conf.prior = parse_prior(sb.at("epsilon"), sb.sub("epsilon"));
        if (const json* v = sb.get("steps")) conf.attack_steps = to_int(*v, sb.sub("steps"));
        if (const json* v = sb.get("step")) conf.attack_step = parse_step(*v, sb.sub("step"));
        if (const json* v = sb.get("restarts")) {
          conf.attack_restarts = to_int(*v, sb.sub("restarts"));
        }
        if (const json* v = sb.get("refresh_every")) {
          conf.refresh_every = to_int(*v, sb.sub("refresh_every"));
        }
        break;
    }
    sb.finish();
  }
  b.finish();
  return conf;
}

SolverConfig parse_solver(const json& j, const std::string& path) {
  Block b(j, path);
  SolverConfig cfg;
  if (const json* v = b.get("mode")) {
    cfg.mode = pick<TrainMode>(*v, b.sub("mode"),
                               {{"oracle_per_iteration", TrainMode::OraclePerIteration},
                                {"alternating", TrainMode::Alternating}});
  }
  if (const json* v = b.get("primal")) {
    cfg.primal_optimizer = pick<PrimalOptimizer>(
        *v, b.sub("primal"),
        {{"gd", PrimalOptimizer::PlainGd}, {"adam", PrimalOptimizer::AdaptiveMoment}});
  }
  if (const json* v = b.get("dual")) {
    cfg.dual_optimizer = pick<DualOptimizer>(
        *v, b.sub("dual"),
        {{"subgradient", DualOptimizer::ProjectedSubgradient},
         {"adam", DualOptimizer::AdaptiveMoment}});
  }
  if (const json* v = b.get("primal_step")) cfg.primal_step = to_double(*v, b.sub("primal_step"));
  if (const json* v = b.get("dual_step")) cfg.dual_step = to_double(*v, b.sub("dual_step"));
  if (const json* v = b.get("oracle_budget")) {
    cfg.oracle_budget = to_int(*v, b.sub("oracle_budget"));
  }
  if (const json* v = b.get("iterations")) {
    cfg.outer_iterations = to_int(*v, b.sub("iterations"));
  }
  if (const json* v = b.get("batch_size")) {
    int bs = to_int(*v, b.sub("batch_size"));
    if (bs <= 0) throw ConfigError(b.sub("batch_size") + " must be positive");
    cfg.batch_size = static_cast<std::size_t>(bs);
  }
  if (const json* v = b.get("seed")) cfg.seed = to_u64(*v, b.sub("seed"));
  if (const json* v = b.get("dual_cap")) cfg.dual_cap = to_double(*v, b.sub("dual_cap"));
  if (const json* v = b.get("theta_init")) {
    cfg.theta_init = pick<ThetaInit>(*v, b.sub("theta_init"),
                                     {{"zeros", ThetaInit::Zeros},
                                      {"scaled_uniform", ThetaInit::ScaledUniform}});
  }
  b.finish();
  cfg.validate();
  return cfg;
}

EvaluationConfig parse_evaluation(const json& j, const std::string& path) {
  Block b(j, path);
  EvaluationConfig eval;
  if (const json* v = b.get("attack_grid")) eval.attack_grid = to_double_vec(*v, b.sub("attack_grid"));
  if (const json* v = b.get("attack")) {
    Block ab(*v, b.sub("attack"));
    if (const json* s = ab.get("steps")) eval.attack_steps = to_int(*s, ab.sub("steps"));
    if (const json* s = ab.get("step")) eval.attack_step = parse_step(*s, ab.sub("step"));
    if (const json* s = ab.get("restarts")) eval.attack_restarts = to_int(*s, ab.sub("restarts"));
    ab.finish();
  }
  if (const json* v = b.get("sensitivity_column")) {
    eval.sensitivity_column = to_string(*v, b.sub("sensitivity_column"));
  }
  if (const json* v = b.get("report_constraint")) {
    eval.report_constraint = to_string(*v, b.sub("report_constraint"));
  }
  if (const json* v = b.get("report_quantile")) {
    eval.report_quantile = to_double(*v, b.sub("report_quantile"));
  }
  if (const json* v = b.get("histogram_bins")) {
    int bins = to_int(*v, b.sub("histogram_bins"));
    if (bins <= 0) throw ConfigError(b.sub("histogram_bins") + " must be positive");
    eval.histogram_bins = static_cast<std::size_t>(bins);
  }
  if (const json* v = b.get("certify_epsilon")) {
    eval.certify_epsilon = to_double(*v, b.sub("certify_epsilon"));
  }
  b.finish();
  return eval;
}

OutputPaths parse_outputs(const json& j, const std::string& path) {
  Block b(j, path);
  OutputPaths out;
  if (const json* v = b.get("dir")) out.dir = to_string(*v, b.sub("dir"));
  if (const json* v = b.get("metrics")) out.metrics = to_string(*v, b.sub("metrics"));
  if (const json* v = b.get("trace")) out.trace = to_string(*v, b.sub("trace"));
  if (const json* v = b.get("model")) out.model = to_string(*v, b.sub("model"));
  if (const json* v = b.get("histogram")) out.histogram = to_string(*v, b.sub("histogram"));
  if (const json* v = b.get("prevalence")) out.prevalence = to_string(*v, b.sub("prevalence"));
  if (const json* v = b.get("sweep")) out.sweep = to_string(*v, b.sub("sweep"));
  if (const json* v = b.get("certificate")) out.certificate = to_string(*v, b.sub("certificate"));
  b.finish();
  return out;
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

RunConfig parse_run_config_doc(const json& doc, const std::string& base_dir) {
  Block b(doc, "config");
  int version = to_int(b.at("config_version"), b.sub("config_version"));
  if (version != 1) {
    throw ConfigError("config.config_version must be 1, got " + std::to_string(version));
  }

  RunConfig config;
  {
    Block db(b.at("dataset"), b.sub("dataset"));
    config.dataset_path = resolve_path(base_dir, to_string(db.at("path"), db.sub("path")));
    const json* inline_schema = db.get("schema");
    const json* schema_path = db.get("schema_path");
    if ((inline_schema != nullptr) == (schema_path != nullptr)) {
      throw ConfigError("config.dataset needs exactly one of 'schema' or 'schema_path'");
    }
    if (inline_schema) {
      config.schema = parse_schema(*inline_schema, db.sub("schema"));
    } else {
      std::string spath = resolve_path(base_dir, to_string(*schema_path, db.sub("schema_path")));
      config.schema = parse_schema(parse_json(read_file(spath), spath), spath);
    }
    db.finish();
  }
  {
    Block sb(b.at("split"), b.sub("split"));
    auto fr = to_double_vec(sb.at("fractions"), sb.sub("fractions"));
    if (fr.size() != 3) {
      throw ConfigError(sb.sub("fractions") + " must have 3 entries (train, validation, test)");
    }
    config.fractions = {fr[0], fr[1], fr[2]};
    if (const json* v = sb.get("seed")) config.split_seed = to_u64(*v, sb.sub("seed"));
    sb.finish();
  }
  config.model = parse_model(b.at("model"), b.sub("model"));
  config.objective = parse_loss(b.at("objective"), b.sub("objective"));
  if (const json* cons = b.get("constraints")) {
    if (!cons->is_array()) throw ConfigError("config.constraints must be an array");
    for (std::size_t i = 0; i < cons->size(); ++i) {
      config.constraints.push_back(
          parse_constraint((*cons)[i], "config.constraints[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = b.get("solver")) {
    config.solver = parse_solver(*v, b.sub("solver"));
  }
  if (const json* v = b.get("evaluation")) {
    config.evaluation = parse_evaluation(*v, b.sub("evaluation"));
  }
  if (const json* v = b.get("outputs")) {
    config.outputs = parse_outputs(*v, b.sub("outputs"));
  }
  b.finish();
  return config;
}

void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects dotted.path=value, got '" + assignment + "'");
  }
  std::string path = assignment.substr(0, eq);
  std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;  // bare strings need no quotes
  }

  std::vector<std::string> keys;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    keys.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  json* node = &doc;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    const std::string& key = keys[i];
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError("--set path '" + path + "': '" + key + "' is not an array index");
      }
      if (idx >= node->size()) {
        throw ConfigError("--set path '" + path + "': index " + key + " out of range");
      }
      node = &(*node)[idx];
    } else {
      if (!node->is_object()) throw ConfigError("--set path '" + path + "' crosses a scalar");
      node = &(*node)[key];
      if (node->is_null()) *node = json::object();
    }
  }
  const std::string& leaf = keys.back();
  if (node->is_array()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(leaf);
    } catch (const std::exception&) {
      throw ConfigError("--set path '" + path + "': '" + leaf + "' is not an array index");
    }
    if (idx >= node->size()) {
      throw ConfigError("--set path '" + path + "': index " + leaf + " out of range");
    }
    (*node)[idx] = value;
  } else {
    if (!node->is_object()) throw ConfigError("--set path '" + path + "' crosses a scalar");
    (*node)[leaf] = value;
  }
}

}  // namespace

std::string OutputPaths::path(const std::string& file) const {
  if (dir.empty()) return file;
  return (std::filesystem::path(dir) / file).string();
}

AdversarialConfig EvaluationConfig::eval_attack(double epsilon) const {
  AdversarialConfig cfg;
  cfg.prior.kind = EpsilonPrior::Kind::Fixed;
  cfg.prior.value = epsilon;
  cfg.steps = attack_steps;
  cfg.step = attack_step;
  cfg.restarts = attack_restarts;
  return cfg;
}

RunConfig parse_run_config_text(const std::string& json_text, const std::string& base_dir) {
  return parse_run_config_doc(parse_json(json_text, "config"), base_dir);
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides) {
  json doc = parse_json(read_file(path), path);
  for (const auto& assignment : overrides) apply_override(doc, assignment);

  std::string base_dir = std::filesystem::path(path).parent_path().string();
  RunConfig config = parse_run_config_doc(doc, base_dir);

  if (const char* env = std::getenv("PACC_SEED")) {
    try {
      std::size_t pos = 0;
      unsigned long long v = std::stoull(env, &pos);
      if (pos != std::string(env).size()) throw std::invalid_argument(env);
      config.solver.seed = v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("PACC_SEED must be a nonnegative integer, got '") +
                        env + "'");
    }
  }
  return config;
}

DatasetSchema parse_schema_text(const std::string& json_text) {
  return parse_schema(parse_json(json_text, "schema"), "schema");
}

CounterfactualMap resolve_counterfactual(const ColumnMetadata& meta,
                                         const ConstraintConf& conf) {
  const EncodedColumn* col = meta.find(conf.column);
  if (!col) {
    throw ConfigError("constraint '" + conf.id + "' references unknown column '" +
                      conf.column + "'");
  }
  if (col->type != ColumnType::Categorical) {
    throw ConfigError("constraint '" + conf.id + "': column '" + conf.column +
                      "' is numeric, counterfactual maps need a categorical column");
  }
  CounterfactualMap map;
  map.rule = conf.rule;
  map.strict = conf.strict;
  map.permutation = conf.permutation;
  for (std::size_t j = 0; j < col->width; ++j) map.columns.push_back(col->offset + j);
  map.validate();
  return map;
}

ConstraintSpec build_constraint(const ConstraintConf& conf, const SampleSet& train,
                                const ColumnMetadata& meta) {
  ConstraintSpec spec;
  spec.id = conf.id;
  spec.kind = conf.kind;
  spec.loss = conf.loss;
  spec.threshold = conf.threshold;
  spec.pairing = conf.loss.pairwise() ? Pairing::InvariancePair : Pairing::None;
  spec.source.kind = conf.source;
  spec.source.base = train;
  spec.source.refresh_every = conf.refresh_every;
  switch (conf.source) {
    case SampleSource::Kind::Raw:
      break;
    case SampleSource::Kind::Counterfactual:
      spec.source.map = resolve_counterfactual(meta, conf);
      break;
    case SampleSource::Kind::Adversarial: {
      AdversarialConfig attack;
      attack.prior = conf.prior;
      attack.steps = conf.attack_steps;
      attack.step = conf.attack_step;
      attack.restarts = conf.attack_restarts;
      attack.validate();
      spec.source.attack = attack;
      break;
    }
  }
  spec.validate();
  return spec;
}

Problem build_problem(RunConfig& config, const SampleSet& train,
                      const ColumnMetadata& meta, std::size_t num_classes) {
  if (config.model.input_dim == 0) config.model.input_dim = train.dim();
  if (config.model.output_dim == 0) config.model.output_dim = num_classes;
  config.model.validate();

  Problem problem;
  problem.model = config.model;
  problem.objective = config.objective;
  problem.train = train;
  for (const auto& conf : config.constraints) {
    problem.constraints.push_back(build_constraint(conf, train, meta));
  }
  problem.validate();
  return problem;
}

void save_model_json(const std::string& path, const ModelSpec& spec,
                     const ParameterVector& params) {
  nlohmann::ordered_json doc;
  doc["format"] = "pacc-model";
  doc["version"] = 1;
  nlohmann::ordered_json model;
  model["kind"] = spec.kind == ModelKind::Linear ? "linear" : "mlp";
  model["input_dim"] = spec.input_dim;
  model["hidden"] = spec.hidden;
  model["output_dim"] = spec.output_dim;
  model["output"] = spec.output_map == OutputMap::Softmax ? "softmax" : "identity";
  model["activation"] = spec.activation == Activation::Sigmoid ? "sigmoid" : "relu";
  doc["model"] = std::move(model);
  doc["theta"] = params.theta.values();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

SavedModel load_model_json(const std::string& path) {
  json doc = parse_json(read_file(path), path);
  Block b(doc, "model-file");
  if (to_string(b.at("format"), "model-file.format") != "pacc-model") {
    throw ConfigError(path + " is not a saved model");
  }
  if (to_int(b.at("version"), "model-file.version") != 1) {
    throw ConfigError(path + ": unsupported model version");
  }
  Block mb(b.at("model"), "model-file.model");
  SavedModel saved;
  saved.spec.kind = pick<ModelKind>(mb.at("kind"), "model-file.model.kind",
                                    {{"linear", ModelKind::Linear}, {"mlp", ModelKind::Mlp}});
  saved.spec.input_dim = static_cast<std::size_t>(
      to_int(mb.at("input_dim"), "model-file.model.input_dim"));
  saved.spec.hidden = to_size_vec(mb.at("hidden"), "model-file.model.hidden");
  saved.spec.output_dim = static_cast<std::size_t>(
      to_int(mb.at("output_dim"), "model-file.model.output_dim"));
  saved.spec.output_map = pick<OutputMap>(mb.at("output"), "model-file.model.output",
                                          {{"softmax", OutputMap::Softmax},
                                           {"identity", OutputMap::Identity}});
  saved.spec.activation = pick<Activation>(mb.at("activation"), "model-file.model.activation",
                                           {{"sigmoid", Activation::Sigmoid},
                                            {"relu", Activation::Relu}});
  mb.finish();
  saved.spec.validate();
  auto theta = to_double_vec(b.at("theta"), "model-file.theta");
  b.finish();
  const std::size_t n = theta.size();
  saved.params = ParameterVector(saved.spec, NumArray({n}, std::move(theta)));
  return saved;
}

}  // namespace pacc
