/*
 * Copyright 2026 The coopra Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COOPRA_COOPRA_HPP
#define COOPRA_COOPRA_HPP

#include <coopra/channel.hpp>
#include <coopra/config.hpp>
#include <coopra/formation.hpp>
#include <coopra/model.hpp>
#include <coopra/optimizer.hpp>
#include <coopra/rng.hpp>
#include <coopra/simulation.hpp>
#include <coopra/stochastics.hpp>
#include <coopra/valuation.hpp>

#endif // COOPRA_COOPRA_HPP
