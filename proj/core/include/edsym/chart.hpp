#pragma once

#include <memory>
#include <string>
#include <vector>

#include "edsym/sample.hpp"

namespace edsym {

struct JetStructure;  // jets.hpp
struct Chart;
using ChartPtr = std::shared_ptr<const Chart>;

// A named coordinate chart. Charts are created once and shared; identity is
// pointer identity, so every object built on a chart holds the same pointer.
struct Chart {
  std::string name;
  std::vector<std::string> coords;
  std::map<std::string, SampleBox> boxes;
  std::vector<Expr> positive;  // constraints, each > 0 on the chart
  std::shared_ptr<const JetStructure> jet;  // set by jet chart builders
  std::vector<ChartPtr> factors;            // set by product_chart

  int dim() const { return static_cast<int>(coords.size()); }
  int index_of(const std::string& c) const;
  bool has_coord(const std::string& c) const { return index_of(c) >= 0; }
  SampleDomain domain() const;
};

ChartPtr make_chart(const std::string& name,
                    const std::vector<std::string>& coords,
                    const std::vector<Expr>& positive = {},
                    const std::map<std::string, SampleBox>& boxes = {});

// Coordinates of the factors concatenated; names must be disjoint.
ChartPtr product_chart(const std::string& name,
                       const std::vector<ChartPtr>& factors);

}  // namespace edsym
