// semslam - semantic-assisted LiDAR odometry, loop closure and mapping
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

int main() {
  std::cout << "semslam\n";
  return 0;
}
