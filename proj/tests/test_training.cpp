// Copyright 2026 The Stainscope Authors. All Rights Reserved.
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


#include "doctest.h"
#include "stainscope/autoencoder.h"
#include "stainscope/synth.h"

using namespace stainscope;

TEST_SUITE("training") {
  TEST_CASE("ten patches over fifty epochs drive the loss below a quarter") {
    std::vector<Image> patches;
    for (uint64_t s = 0; s < 10; ++s) patches.push_back(gen_healthy_patch(100 + s).image);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.max_epochs = 50;
    cfg.patience = 50;
    cfg.seed = 3;
    const TrainResult r = train_autoencoder(patches, cfg);
    REQUIRE(r.log.epochs.size() == 50);
    const double initial = r.log.initial_train_loss;
    const double last = r.log.epochs.back().train_loss;
    MESSAGE("initial " << initial << " final " << last);
    CHECK(last < 0.25 * initial);
    CHECK(r.log.epochs.back().val_loss < r.log.epochs.front().val_loss);
  }
}
