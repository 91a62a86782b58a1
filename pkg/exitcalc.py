from exitcalc import create_cli

cli = create_cli('default')

if __name__ == '__main__':
    cli()
