#include "bnpreg/serialization.hpp"

#include "bnpreg/errors.hpp"

namespace bnpreg {

using nlohmann::json;

namespace {

std::string convention_name(FourierConvention c) {
  return c == FourierConvention::kOrthonormal ? "orthonormal" : "half_period";
}

FourierConvention convention_from_name(const std::string& name) {
  if (name == "orthonormal") return FourierConvention::kOrthonormal;
  if (name == "half_period") return FourierConvention::kHalfPeriod;
  throw ConfigError("unknown Fourier convention '" + name + "'");
}

}  // namespace

json to_json(const SeriesFunction& f) {
  json out;
  std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, FourierBasis>) {
          out["basis"] = "fourier";
          out["params"] = {{"convention", convention_name(b.convention())}};
        } else if constexpr (std::is_same_v<B, HaarWaveletBasis>) {
          out["basis"] = "haar";
          out["params"] = {{"max_resolution", b.max_resolution()}};
        } else {
          out["basis"] = "bspline";
          out["params"] = {{"order", b.order()}, {"breakpoints", b.breakpoints()}};
        }
      },
      f.basis());
  out["coefficients"] = std::vector<double>(f.coefficients().begin(), f.coefficients().end());
  return out;
}

SeriesFunction series_from_json(const json& j) {
  try {
    const std::string name = j.at("basis").get<std::string>();
    const json& params = j.at("params");
    auto coefficients = j.at("coefficients").get<std::vector<double>>();
    if (name == "fourier")
      return SeriesFunction(FourierBasis(convention_from_name(params.at("convention"))),
                            std::move(coefficients));
    if (name == "haar")
      return SeriesFunction(HaarWaveletBasis(params.at("max_resolution").get<int>()),
                            std::move(coefficients));
    if (name == "bspline")
      return SeriesFunction(BSplineBasis(params.at("order").get<int>(),
                                         params.at("breakpoints").get<std::vector<double>>()),
                            std::move(coefficients));
    throw ConfigError("unknown basis '" + name + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed series function: ") + e.what());
  }
}

json to_json(const AdditiveFunction& f) {
  json components = json::array();
  for (const auto& c : f.components) components.push_back(to_json(c));
  return {{"mu", f.mu}, {"active", f.active}, {"components", components}};
}

AdditiveFunction additive_from_json(const json& j) {
  try {
    AdditiveFunction f;
    f.mu = j.at("mu").get<double>();
    f.active = j.at("active").get<std::vector<std::uint8_t>>();
    for (const auto& c : j.at("components")) f.components.push_back(series_from_json(c));
    if (f.active.size() != f.components.size())
      throw ConfigError("additive function: active flags and components differ in length");
    return f;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed additive function: ") + e.what());
  }
}

json to_json(const Design& design) {
  json out{{"kind", to_string(design.kind())},
           {"dimension", design.dimension()},
           {"points", std::vector<double>(design.points().begin(), design.points().end())}};
  out["seed"] = design.seed() ? json(*design.seed()) : json(nullptr);
  return out;
}

Design design_from_json(const json& j) {
  try {
    std::optional<std::uint64_t> seed;
    if (!j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
    return Design(j.at("points").get<std::vector<double>>(), j.at("dimension").get<std::size_t>(),
                  design_kind_from_string(j.at("kind").get<std::string>()), seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed design: ") + e.what());
  }
}

}  // namespace bnpreg
