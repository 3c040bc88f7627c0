from ngacsafe.cli import main

main()
