from geoops.cli import main

raise SystemExit(main())
