#include "mmsim/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mmsim/errors.hpp"
#include "mmsim/format.hpp"

namespace mmsim {

void write_checkpoint(std::ostream& out, const PolicyParams& params) {
  const NetworkShape& shape = params.network.shape();
  out << "mmsim-checkpoint " << kCheckpointVersion << '\n';
  out << "role " << to_string(params.role) << '\n';
  out << "action_kind " << to_string(params.action_space.kind) << '\n';
  out << "input_dim " << shape.input_dim << '\n';
  out << "hidden";
  for (std::size_t h : shape.hidden) out << ' ' << h;
  out << '\n';
  out << "action_dim " << shape.action_dim << '\n';
  out << "action_box";
  for (const Interval& b : params.action_space.bounds) {
    out << ' ' << format_hex_double(b.low) << ' ' << format_hex_double(b.high);
  }
  out << '\n';
  out << "scaling " << format_hex_double(params.scaling.price_scale) << ' '
      << format_hex_double(params.scaling.cash_scale) << ' '
      << format_hex_double(params.scaling.inventory_scale) << '\n';
  out << "config_hash " << (params.config_hash.empty() ? "-" : params.config_hash) << '\n';
  out << "optimizer " << (params.optimizer.empty() ? "-" : params.optimizer) << '\n';
  const auto values = params.network.parameters();
  out << "parameters " << values.size() << '\n';
  for (double v : values) out << format_hex_double(v) << '\n';
  out << "end\n";
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::istream& in) : in_(in) {}

  std::vector<std::string> line(std::string_view key) {
    std::string text;
    if (!std::getline(in_, text)) {
      throw CheckpointError("checkpoint truncated before '" + std::string(key) + "'");
    }
    std::istringstream is(text);
    std::vector<std::string> tokens;
    for (std::string tok; is >> tok;) tokens.push_back(tok);
    if (tokens.empty() || tokens.front() != key) {
      throw CheckpointError("checkpoint: expected '" + std::string(key) + "', found '" + text +
                            "'");
    }
    tokens.erase(tokens.begin());
    return tokens;
  }

  std::string single(std::string_view key) {
    auto tokens = line(key);
    if (tokens.size() != 1) throw CheckpointError("checkpoint: malformed '" + std::string(key) + "'");
    return tokens.front();
  }

  std::size_t size(std::string_view key) { return to_size(single(key), key); }

  static std::size_t to_size(const std::string& text, std::string_view key) {
    try {
      const auto v = parse_int(text);
      if (v < 0) throw std::invalid_argument("negative");
      return static_cast<std::size_t>(v);
    } catch (const std::invalid_argument&) {
      throw CheckpointError("checkpoint: bad integer for '" + std::string(key) + "'");
    }
  }

  static double to_double(const std::string& text) {
    try {
      return parse_hex_double(text);
    } catch (const std::invalid_argument& e) {
      throw CheckpointError(std::string("checkpoint: ") + e.what());
    }
  }

 private:
  std::istream& in_;
};

}  // namespace

PolicyParams read_checkpoint(std::istream& in) {
  HeaderReader r(in);
  const auto version = r.size("mmsim-checkpoint");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  PolicyParams p;
  try {
    p.role = role_from_string(r.single("role"));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  const std::string kind = r.single("action_kind");
  NetworkShape shape;
  shape.input_dim = r.size("input_dim");
  shape.hidden.clear();
  for (const auto& tok : r.line("hidden")) shape.hidden.push_back(HeaderReader::to_size(tok, "hidden"));
  shape.action_dim = r.size("action_dim");

  const auto box = r.line("action_box");
  if (box.size() != 2 * shape.action_dim) throw CheckpointError("checkpoint: action_box size");
  p.action_space.kind = action_kind(p.role);
  if (kind != to_string(p.action_space.kind)) {
    throw CheckpointError("checkpoint: action kind '" + kind + "' does not match role");
  }
  for (std::size_t i = 0; i < shape.action_dim; ++i) {
    p.action_space.bounds.push_back(
        {HeaderReader::to_double(box[2 * i]), HeaderReader::to_double(box[2 * i + 1])});
  }
  const auto scaling = r.line("scaling");
  if (scaling.size() != 3) throw CheckpointError("checkpoint: scaling needs three values");
  p.scaling = {HeaderReader::to_double(scaling[0]), HeaderReader::to_double(scaling[1]),
               HeaderReader::to_double(scaling[2])};
  p.config_hash = r.single("config_hash");
  if (p.config_hash == "-") p.config_hash.clear();
  {
    auto tokens = r.line("optimizer");
    std::string joined;
    for (const auto& t : tokens) joined += (joined.empty() ? "" : " ") + t;
    p.optimizer = joined == "-" ? std::string{} : joined;
  }
  const std::size_t count = r.size("parameters");

  try {
    p.network = ActorCritic(shape);
  } catch (const ContractViolation& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  if (p.network.parameter_count() != count) {
    throw CheckpointError("checkpoint: parameter count " + std::to_string(count) +
                          " does not match the declared shape");
  }
  auto values = p.network.parameters();
  std::string text;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, text)) throw CheckpointError("checkpoint truncated in parameters");
    values[i] = HeaderReader::to_double(text);
  }
  if (!std::getline(in, text) || text != "end") {
    throw CheckpointError("checkpoint: missing end marker");
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  write_checkpoint(out, params);
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

std::uint64_t parameter_hash(const PolicyParams& params) noexcept {
  const auto values = params.network.parameters();
  return fnv1a(std::string_view(reinterpret_cast<const char*>(values.data()),
                                values.size() * sizeof(double)));
}

}  // namespace mmsim
