#pragma once

#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wvf/grid.hpp"

namespace wvf::test {

inline std::string data_path(const std::string& rel) {
  return std::string(WVF_DATA_DIR) + "/" + rel;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline GridLayout four_rooms_layout() {
  return GridLayout::load(data_path("maps/four_rooms.map"));
}

inline GridLayout pickup_layout() {
  return GridLayout::load(data_path("maps/pickup.map"));
}

inline Environment four_rooms(std::vector<Cell> goals = {}) {
  FourRoomsConfig c;
  c.layout = four_rooms_layout();
  c.goals = std::move(goals);
  return four_rooms_build(c);
}

inline Environment pickup(const std::string& attribute = "any") {
  PickupConfig c;
  c.layout = pickup_layout();
  c.attribute = attribute;
  return pickup_grid_build(c);
}

// Wall-aware BFS distances from a set of source cells, computed straight
// from the layout without going through the world's transition table.
inline std::vector<int> bfs_distances(const GridWorld& grid,
                                      const std::vector<Cell>& sources) {
  std::vector<int> dist(grid.state_count(), -1);
  std::deque<StateId> queue;
  for (const Cell& c : sources) {
    const StateId s = *grid.state_of(c);
    dist[s] = 0;
    queue.push_back(s);
  }
  const int dx[] = {0, 0, 1, -1};
  const int dy[] = {-1, 1, 0, 0};
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    const Cell c = grid.cell_of(s);
    for (int k = 0; k < 4; ++k) {
      const Cell n{c.x + dx[k], c.y + dy[k]};
      if (!grid.layout().is_free(n)) continue;
      const StateId t = *grid.state_of(n);
      if (dist[t] >= 0) continue;
      dist[t] = dist[s] + 1;
      queue.push_back(t);
    }
  }
  return dist;
}

}  // namespace wvf::test
