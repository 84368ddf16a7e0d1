#include "smle/model/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace smle {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'L', 'E'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void block(std::span<const double> v) {
    for (double x : v) f64(x);
  }
  void dim(std::size_t n) {
    if (n > 0xFFFFFFFFu) throw std::invalid_argument("serialize: dimension too large");
    u32(static_cast<std::uint32_t>(n));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("model payload truncated");
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return std::bit_cast<double>(bits);
  }
  void block(std::span<double> v) {
    need(8 * v.size());
    for (double& x : v) x = f64();
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_affine_params(Writer& w, const AffineMap& a) {
  w.block(a.weight.data());
  w.block(a.bias);
}

AffineMap read_affine(Reader& r, std::size_t in, std::size_t out) {
  r.need(8 * (in * out + out));
  AffineMap a = AffineMap::zeros(in, out);
  r.block(a.weight.data());
  r.block(a.bias);
  return a;
}

nlohmann::json affine_json(const AffineMap& a) {
  nlohmann::json w = nlohmann::json::array();
  for (std::size_t i = 0; i < a.weight.rows(); ++i) w.push_back(a.weight.row_vector(i));
  return {{"weight", w}, {"bias", a.bias}};
}

AffineMap affine_from_json(const nlohmann::json& j) {
  const auto rows = j.at("weight").get<std::vector<Vector>>();
  const auto bias = j.at("bias").get<Vector>();
  Matrix w = rows.empty() ? Matrix(0, 0) : Matrix::from_rows(rows);
  return {std::move(w), bias};
}

nlohmann::json aux_json(const AuxModel& a) {
  if (a.kind == AuxKind::Constant) return {{"value", a.constant}};
  return affine_json(a.affine);
}

AuxModel aux_from_json(const nlohmann::json& j, AuxKind kind) {
  if (kind == AuxKind::Constant) return AuxModel::make_constant(j.at("value").get<Vector>());
  return AuxModel::make_affine(affine_from_json(j));
}

}  // namespace

std::vector<std::uint8_t> serialize(const SmleModel& model) {
  model.validate();
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kModelFormatVersion);
  w.dim(model.input_dim());
  w.dim(model.embed_dim());
  w.dim(model.output_dim());
  w.dim(model.h.depth());
  for (const Layer& l : model.h.layers()) {
    w.dim(l.map.in_dim());
    w.dim(l.map.out_dim());
    w.u8(l.act == Activation::Relu ? 1 : 0);
  }
  w.u8(model.h_low.kind == AuxKind::Affine ? 1 : 0);

  for (const Interval& iv : model.input_box) {
    w.f64(iv.lo);
    w.f64(iv.hi);
  }
  for (const Layer& l : model.h.layers()) write_affine_params(w, l.map);
  for (const AuxModel* a : {&model.h_low, &model.h_up}) {
    if (a->kind == AuxKind::Constant) w.block(a->constant);
    else write_affine_params(w, a->affine);
  }
  write_affine_params(w, model.g);
  return w.take();
}

SmleModel deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < 8) throw FormatError("model payload truncated");
  for (char c : kMagic)
    if (r.u8() != static_cast<std::uint8_t>(c)) throw FormatError("bad magic tag");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw VersionError("unsupported model format version " + std::to_string(version));

  const std::size_t n = r.u32(), e = r.u32(), m = r.u32(), depth = r.u32();
  if (depth == 0) throw FormatError("model has no backbone layers");
  r.need(9 * depth);
  std::vector<std::tuple<std::size_t, std::size_t, Activation>> shapes;
  for (std::size_t i = 0; i < depth; ++i) {
    const std::size_t in = r.u32(), out = r.u32();
    const std::uint8_t act = r.u8();
    if (act > 1) throw FormatError("bad activation tag");
    shapes.emplace_back(in, out, act ? Activation::Relu : Activation::Identity);
  }
  const std::uint8_t aux = r.u8();
  if (aux > 1) throw FormatError("bad aux kind tag");

  SmleModel model;
  r.need(16 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = r.f64(), hi = r.f64();
    if (!(lo <= hi)) throw FormatError("input box interval inverted");
    model.input_box.emplace_back(lo, hi);
  }
  std::vector<Layer> layers;
  for (auto [in, out, act] : shapes) layers.push_back({read_affine(r, in, out), act});
  try {
    model.h = Mlp(std::move(layers));
  } catch (const DimensionError& ex) {
    throw FormatError(std::string("inconsistent layer header: ") + ex.what());
  }
  for (AuxModel* a : {&model.h_low, &model.h_up}) {
    if (aux == 0) {
      r.need(8 * e);
      Vector c(e);
      r.block(c);
      *a = AuxModel::make_constant(std::move(c));
    } else {
      *a = AuxModel::make_affine(read_affine(r, n, e));
    }
  }
  model.g = read_affine(r, e, m);
  if (!r.done()) throw FormatError("trailing bytes after model payload");
  try {
    model.validate();
  } catch (const std::invalid_argument& ex) {
    throw FormatError(std::string("inconsistent model: ") + ex.what());
  }
  return model;
}

nlohmann::json to_json(const SmleModel& model) {
  nlohmann::json j;
  j["format"] = "smle-model";
  j["version"] = kModelFormatVersion;
  nlohmann::json box = nlohmann::json::array();
  for (const Interval& iv : model.input_box) box.push_back({iv.lo, iv.hi});
  j["input_box"] = box;
  nlohmann::json h = nlohmann::json::array();
  for (const Layer& l : model.h.layers()) {
    nlohmann::json lj = affine_json(l.map);
    lj["activation"] = to_string(l.act);
    h.push_back(lj);
  }
  j["h"] = h;
  j["aux_kind"] = model.h_low.kind == AuxKind::Constant ? "constant" : "affine";
  j["h_low"] = aux_json(model.h_low);
  j["h_up"] = aux_json(model.h_up);
  j["g"] = affine_json(model.g);
  return j;
}

SmleModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "smle-model") throw FormatError("not an smle-model document");
  if (j.at("version").get<std::uint32_t>() != kModelFormatVersion) throw VersionError("unsupported model json version");
  SmleModel model;
  for (const auto& iv : j.at("input_box")) model.input_box.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
  std::vector<Layer> layers;
  for (const auto& lj : j.at("h"))
    layers.push_back({affine_from_json(lj), activation_from_string(lj.at("activation").get<std::string>())});
  model.h = Mlp(std::move(layers));
  const std::string kind = j.at("aux_kind").get<std::string>();
  if (kind != "constant" && kind != "affine") throw FormatError("bad aux_kind: " + kind);
  const AuxKind k = kind == "constant" ? AuxKind::Constant : AuxKind::Affine;
  model.h_low = aux_from_json(j.at("h_low"), k);
  model.h_up = aux_from_json(j.at("h_up"), k);
  model.g = affine_from_json(j.at("g"));
  model.validate();
  return model;
}

void save_model(const SmleModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize(model);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

SmleModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace smle
