// Copyright 2026 The lgn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lgn/error.h"
#include "lgn/network.h"

namespace lgn {

using nlohmann::json;

std::string NetlistToJson(const DiscreteNetlist& netlist) {
  netlist.Validate();
  json doc;
  doc["format_version"] = kNetlistFormatVersion;
  doc["input_bits"] = netlist.input_bits;
  doc["depth"] = netlist.depth;
  doc["width"] = netlist.width;
  doc["num_classes"] = netlist.num_classes;
  doc["groupsum_tau"] = netlist.groupsum_tau;
  json layers = json::array();
  for (const NetlistLayer& layer : netlist.layers) {
    std::vector<int> gates;
    gates.reserve(layer.gates.size());
    for (Gate g : layer.gates) gates.push_back(GateIndex(g));
    layers.push_back({{"gates", gates}, {"left", layer.left},
                      {"right", layer.right}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump() + "\n";
}

DiscreteNetlist NetlistFromJson(std::string_view text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kNetlistFormatVersion) {
      throw Error(ErrorCode::kFormat,
                  "unsupported netlist format_version " +
                      std::to_string(version));
    }
    DiscreteNetlist net;
    net.input_bits = doc.at("input_bits").get<int>();
    net.depth = doc.at("depth").get<int>();
    net.width = doc.at("width").get<int>();
    net.num_classes = doc.at("num_classes").get<int>();
    net.groupsum_tau = doc.at("groupsum_tau").get<double>();
    for (const json& layer : doc.at("layers")) {
      NetlistLayer out;
      for (int id : layer.at("gates").get<std::vector<int>>()) {
        out.gates.push_back(GateFromId(id));
      }
      out.left = layer.at("left").get<std::vector<std::uint32_t>>();
      out.right = layer.at("right").get<std::vector<std::uint32_t>>();
      net.layers.push_back(std::move(out));
    }
    net.Validate();
    return net;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("netlist: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFormat) throw;
    throw Error(ErrorCode::kFormat, std::string("netlist: ") + e.what());
  }
}

void SaveNetlist(const DiscreteNetlist& netlist, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << NetlistToJson(netlist);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

DiscreteNetlist LoadNetlist(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return NetlistFromJson(buf.str());
}

}  // namespace lgn
