// SPDX-License-Identifier: Apache-2.0
//
// mimo-elm: massive MIMO uplink receivers built as extreme learning machines
// Copyright (C) 2026 The mimo-elm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "mimo_elm/channel.hpp"
#include "mimo_elm/frontend.hpp"
#include "mimo_elm/harness/config.hpp"
#include "mimo_elm/harness/experiments.hpp"
#include "mimo_elm/harness/records.hpp"
#include "mimo_elm/numeric.hpp"
#include "mimo_elm/receivers.hpp"
