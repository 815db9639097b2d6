"""
Created on 2026-10-19

@author: wf

"""

from dataclasses import dataclass

import omnisim


@dataclass
class Version(object):
    """
    Version handling for omnisim
    """

    name = "omnisim"
    version = omnisim.__version__
    date = "2026-10-19"
    updated = "2026-10-19"
    description = "Omnidirectional tiltrotor hexacopter simulator with pseudo-inverse control allocation"

    authors = "Wolfgang Fahl"

    doc_url = "https://wiki.bitplan.com/index.php/omnisim"
    chat_url = "https://github.com/WolfgangFahl/omnisim/discussions"
    cm_url = "https://github.com/WolfgangFahl/omnisim"

    license = f"""Copyright 2026 contributors. All rights reserved.

  Licensed under the Apache License 2.0
  http://www.apache.org/licenses/LICENSE-2.0

  Distributed on an "AS IS" basis without warranties
  or conditions of any kind, either express or implied."""
    longDescription = f"""{name} version {version}
{description}

  Created by {authors} on {date} last updated {updated}"""
