#include "model_io.hpp"

#include <fstream>
#include <sstream>

#include "config.hpp"
#include "occ/error.hpp"

namespace occ::cli {

namespace {

class Reader {
 public:
  Reader(std::istream& in, std::string file) : in_(in), file_(std::move(file)) {}

  // Next non-comment line as a token stream.
  std::istringstream next(const std::string& expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineNo_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      std::istringstream ss(line);
      std::string tag;
      ss >> tag;
      if (!expected.empty() && tag != expected) fail("expected '" + expected + "', found '" + tag + "'");
      return ss;
    }
    fail("unexpected end of file, expected '" + expected + "'");
  }

  template <class T>
  T read(std::istringstream& ss, const char* what) {
    T v{};
    if (!(ss >> v)) fail(std::string("cannot read ") + what);
    return v;
  }

  double readDouble(std::istringstream& ss, const char* what) {
    std::string tok;
    if (!(ss >> tok)) fail(std::string("cannot read ") + what);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail(std::string("bad number '") + tok + "' for " + what);
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw IngestionError("model file '" + file_ + "' line " + std::to_string(lineNo_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::string file_;
  std::size_t lineNo_ = 0;
};

}  // namespace

void saveModel(const SavedModel& saved, const std::filesystem::path& path,
               const std::vector<std::string>& comments) {
  const TrainedModel& m = saved.model;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write model file '" + path.string() + "'");
  out << kModelMagic << ' ' << kModelVersion << '\n';
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "loss " << toString(m.config.loss.kind) << '\n';
  out << "activation " << toString(m.params.activation.kind) << ' '
      << formatNumber(m.params.activation.slope) << '\n';
  out << "layers " << m.params.layers.size() << '\n';
  for (const auto& layer : m.params.layers) {
    out << "layer " << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      out << 'w';
      for (double v : layer.weight.row(r)) out << ' ' << formatNumber(v);
      out << '\n';
    }
    out << 'b';
    for (double v : layer.bias) out << ' ' << formatNumber(v);
    out << '\n';
  }
  out << "center " << m.sphere.center.size();
  for (double v : m.sphere.center) out << ' ' << formatNumber(v);
  out << '\n';
  out << "radius " << formatNumber(m.sphere.radius) << '\n';
  out << "threshold " << formatNumber(m.sphere.threshold) << '\n';
  out << "normalizer " << saved.normalizer.ranges.size();
  for (const auto& r : saved.normalizer.ranges) {
    out << ' ' << formatNumber(r.min) << ' ' << formatNumber(r.max);
  }
  out << "\nend\n";
  if (!out) throw IngestionError("failed writing model file '" + path.string() + "'");
}

SavedModel loadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open model file '" + path.string() + "'");
  Reader rd(in, path.string());

  {
    auto head = rd.next(kModelMagic);
    const int version = rd.read<int>(head, "format version");
    if (version != kModelVersion) {
      rd.fail("unsupported format version " + std::to_string(version));
    }
  }

  SavedModel saved;
  TrainedModel& m = saved.model;
  {
    auto ss = rd.next("loss");
    try {
      m.config.loss.kind = parseLossKind(rd.read<std::string>(ss, "loss kind"));
    } catch (const ValidationError& e) {
      rd.fail(e.what());
    }
  }
  {
    auto ss = rd.next("activation");
    try {
      m.params.activation.kind = parseActivationKind(rd.read<std::string>(ss, "activation"));
    } catch (const ValidationError& e) {
      rd.fail(e.what());
    }
    m.params.activation.slope = rd.readDouble(ss, "activation slope");
    m.config.activation = m.params.activation;
  }
  auto ls = rd.next("layers");
  const auto nLayers = rd.read<std::size_t>(ls, "layer count");
  if (nLayers == 0 || nLayers > 64) rd.fail("implausible layer count");
  for (std::size_t l = 0; l < nLayers; ++l) {
    auto hs = rd.next("layer");
    const auto fanIn = rd.read<std::size_t>(hs, "fan-in");
    const auto fanOut = rd.read<std::size_t>(hs, "fan-out");
    if (fanIn == 0 || fanOut == 0) rd.fail("empty layer");
    LayerParams layer{Matrix(fanIn, fanOut), std::vector<double>(fanOut)};
    for (std::size_t r = 0; r < fanIn; ++r) {
      auto ws = rd.next("w");
      for (std::size_t c = 0; c < fanOut; ++c) layer.weight(r, c) = rd.readDouble(ws, "weight");
    }
    auto bs = rd.next("b");
    for (double& v : layer.bias) v = rd.readDouble(bs, "bias");
    m.params.layers.push_back(std::move(layer));
  }
  try {
    m.params.validate();
  } catch (const occ::Error& e) {
    rd.fail(e.what());
  }
  {
    auto ss = rd.next("center");
    const auto k = rd.read<std::size_t>(ss, "center width");
    if (k != m.params.outputDim()) rd.fail("center width does not match the output layer");
    m.sphere.center.resize(k);
    for (double& v : m.sphere.center) v = rd.readDouble(ss, "center");
  }
  {
    auto ss = rd.next("radius");
    m.sphere.radius = rd.readDouble(ss, "radius");
  }
  {
    auto ss = rd.next("threshold");
    m.sphere.threshold = rd.readDouble(ss, "threshold");
  }
  {
    auto ss = rd.next("normalizer");
    const auto d = rd.read<std::size_t>(ss, "normalizer width");
    if (d != m.params.inputDim()) rd.fail("normalizer width does not match the input layer");
    saved.normalizer.ranges.resize(d);
    for (auto& r : saved.normalizer.ranges) {
      r.min = rd.readDouble(ss, "normalizer min");
      r.max = rd.readDouble(ss, "normalizer max");
    }
  }
  rd.next("end");
  m.config.hiddenDim = m.params.layers.front().weight.cols();
  m.config.outputDim = m.params.outputDim();
  return saved;
}

}  // namespace occ::cli
