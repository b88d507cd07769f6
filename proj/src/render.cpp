// Copyright 2026 The mmLayout Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmlayout/render.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mmlayout {
namespace {

const char* const kPalette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4",
                                "#f032e6", "#9a6324", "#800000", "#469990", "#000075", "#808000"};

std::string num(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string rect(const BBox& b, const std::string& attrs) {
  return "<rect " + attrs + " x=\"" + num(b.x0) + "\" y=\"" + num(b.y0) + "\" width=\"" + num(b.width()) +
         "\" height=\"" + num(b.height()) + "\"/>";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Page& page, std::span<const SalientRegion> regions) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(page.width) << "\" height=\""
      << num(page.height) << "\" viewBox=\"0 0 " << num(page.width) << " " << num(page.height) << "\">\n";
  out << "  <rect class=\"page\" x=\"0\" y=\"0\" width=\"" << num(page.width) << "\" height=\"" << num(page.height)
      << "\" fill=\"white\" stroke=\"none\"/>\n";
  for (size_t i = 0; i < page.segments.size(); ++i) {
    std::string r = rect(page.segments[i].bbox, "class=\"segment\" data-index=\"" + std::to_string(i) +
                                                    "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"");
    r.replace(r.size() - 2, 2, "><title>" + escape(page.segments[i].text) + "</title></rect>");
    out << "  " << r << "\n";
  }
  constexpr size_t kColours = sizeof(kPalette) / sizeof(kPalette[0]);
  for (size_t r = 0; r < regions.size(); ++r) {
    const BBox b{regions[r].bbox.x0 - 3, regions[r].bbox.y0 - 3, regions[r].bbox.x1 + 3, regions[r].bbox.y1 + 3};
    out << "  "
        << rect(b, "class=\"region\" data-index=\"" + std::to_string(r) + "\" fill=\"none\" stroke=\"" +
                       kPalette[r % kColours] + "\" stroke-width=\"2\"")
        << "\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace mmlayout
