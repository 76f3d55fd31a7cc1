from aiskintojas.cli import main

raise SystemExit(main())
