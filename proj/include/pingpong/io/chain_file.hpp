#pragma once

// Chain files: the designed chain together with its pulse train, read back
// verbatim by all three dynamics tiers. Times are atomic units; the *_ps
// fields are informational.

#include <filesystem>
#include <fstream>
#include "json.hpp"
#include <string>

#include "pingpong/chain.hpp"
#include "pingpong/errors.hpp"
#include "pingpong/units.hpp"

namespace pingpong::io {

struct ChainFile {
  ChainSpec chain;
  PulseTrain train;
  double omega0_peak = 0.0;
  double area = 0.0;
};

inline nlohmann::json chain_to_json(const ChainFile& cf) {
  using nlohmann::json;
  const auto& c = cf.chain;
  json j;
  j["format"] = "pingpong-chain";
  j["version"] = 1;
  json states = json::array();
  for (int i = 0; i < c.size(); ++i) {
    const auto& s = c.states[i];
    states.push_back({{"label", to_string(s)},
                      {"e", to_string(s.e)},
                      {"v", s.v},
                      {"J", s.J},
                      {"energy_hartree", c.energies[i]},
                      {"energy_cm", units::to_wavenumbers(c.energies[i])}});
  }
  j["states"] = states;
  json links = json::array();
  for (int k = 0; k < c.links(); ++k) {
    const auto& p = cf.train.pulses.at(k);
    links.push_back({{"from", to_string(c.states[k])},
                     {"to", to_string(c.states[k + 1])},
                     {"dme", c.dmes[k]},
                     {"angular", c.angular[k]},
                     {"omega_hartree", p.omega},
                     {"omega_cm", units::to_wavenumbers(p.omega)},
                     {"eps0", p.eps0},
                     {"intensity_wcm2", intensity_from_amplitude(p.eps0)},
                     {"t0_au", p.t0},
                     {"sigma_au", p.sigma},
                     {"t0_ps", units::to_picoseconds(p.t0)},
                     {"sigma_ps", units::to_picoseconds(p.sigma)}});
  }
  j["links"] = links;
  j["pulses"] = {{"omega0_peak", cf.omega0_peak},
                 {"area", cf.area},
                 {"t_start_au", cf.train.t_start},
                 {"t_end_au", cf.train.t_end},
                 {"t_start_ps", units::to_picoseconds(cf.train.t_start)},
                 {"t_end_ps", units::to_picoseconds(cf.train.t_end)}};
  return j;
}

inline ChainFile chain_from_json(const nlohmann::json& j) {
  ChainFile cf;
  try {
    if (j.value("format", "") != "pingpong-chain") throw ParseError("not a chain file");
    for (const auto& s : j.at("states")) {
      cf.chain.states.push_back(parse_state(s.at("label").get<std::string>()));
      cf.chain.energies.push_back(s.at("energy_hartree").get<double>());
    }
    for (const auto& l : j.at("links")) {
      cf.chain.dmes.push_back(l.at("dme").get<double>());
      cf.chain.angular.push_back(l.at("angular").get<double>());
      cf.train.pulses.push_back({l.at("eps0").get<double>(), l.at("omega_hartree").get<double>(),
                                 l.at("t0_au").get<double>(), l.at("sigma_au").get<double>()});
    }
    const auto& p = j.at("pulses");
    cf.omega0_peak = p.at("omega0_peak").get<double>();
    cf.area = p.at("area").get<double>();
    cf.train.t_start = p.at("t_start_au").get<double>();
    cf.train.t_end = p.at("t_end_au").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed chain file: ") + e.what());
  }
  try {
    cf.chain.validate(0.0);
  } catch (const Error& e) {
    throw ParseError(std::string("invalid chain in chain file: ") + e.what());
  }
  if (static_cast<int>(cf.train.pulses.size()) != cf.chain.links()) {
    throw ParseError("chain file: pulse count does not match the chain");
  }
  for (const auto& p : cf.train.pulses) {
    if (!(p.eps0 >= 0.0) || !(p.omega > 0.0) || !(p.sigma > 0.0)) {
      throw ParseError("chain file: pulse needs eps0 >= 0, omega > 0 and sigma > 0");
    }
  }
  return cf;
}

inline void write_chain_file(const std::filesystem::path& path, const ChainFile& cf) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << chain_to_json(cf).dump(2) << '\n';
}

inline ChainFile read_chain_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open chain file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return chain_from_json(j);
}

}  // namespace pingpong::io
